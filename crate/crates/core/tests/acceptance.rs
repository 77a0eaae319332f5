//! Acceptance gate. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion.
//!
//! Two criteria are red and stay red: the printed boundary-current vectors
//! (two entries disagree with the eigenfunctions they are supposed to come
//! from) and the l_max 8 -> 16 truncation study (closed-channel truncation
//! converges only algebraically). For those the gate checks that the failure
//! is exactly the analysed one; any other failure, or a red turning green,
//! fails the run.

use std::f64::consts::PI;
use std::time::Instant;

use junctionlab::dnmap::{m_raw, split_dn, split_rectangle, Pole};
use junctionlab::extension::{imaginary_part_eigenvalues, make_setup, DeficiencySetup, InnerHamiltonian};
use junctionlab::geometry::thresholds;
use junctionlab::golden;
use junctionlab::graphvertex::{datta_projection, fit_symmetric_beta};
use junctionlab::intermediate::{compensated_n, n_raw, IntermediateDN, NdPoleData};
use junctionlab::linalg::{c, eye, frob, inverse, linspace, max_abs, symmetric_eigen, CMat};
use junctionlab::resonance::{blaschke_product, factor_split, scalar_smatrix, solve_resonances, ScalarModel};
use junctionlab::smatrix::{blaschke_theta, datta_limit, jump_start, jump_start_blaschke, smatrix_from_n, smatrix_pipeline};
use junctionlab::spectral::channel_overlap;
use junctionlab::sweep::{Pipeline, RunConfig};
use junctionlab::tjunction::{
    example4_junction, example4_printed_data, overlap_constants, psi12_printed, psi21_printed, shifted_eigenvalue,
    symmetric_gamma, symmetric_junction, ALPHA, BETA, GAMMA,
};
use junctionlab::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    id: usize,
    pass: bool,
    detail: String,
}

fn outcome(id: usize, pass: bool, detail: String) -> Outcome {
    Outcome { id, pass, detail }
}

fn config() -> RunConfig {
    RunConfig::load(&std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/example4.json")).expect("config loads")
}

fn g1(l_max: usize, cut: f64) -> IntermediateDN {
    let j = example4_junction();
    IntermediateDN::new(split_rectangle(&j, (4.2, 5.8), cut, l_max).unwrap(), thresholds(&j, l_max).unwrap()).unwrap()
}

fn printed_idn() -> IntermediateDN {
    let ch = thresholds(&example4_junction(), 2).unwrap();
    IntermediateDN::new(split_dn(&example4_printed_data(), (4.2, 5.8), 40.0, 2).unwrap(), ch).unwrap()
}

fn quad(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (x, w) = junctionlab::linalg::gauss_legendre(40);
    let (m, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    x.iter().zip(&w).map(|(&t, &wt)| wt * f(m + h * t)).sum::<f64>() * h
}

fn criterion1() -> Outcome {
    let t = Instant::now();
    let (a, g, b) = overlap_constants();
    let aq = 2.0 * quad(|x| (2.0 * x).sin() * (4.0 * x).sin(), 0.0, PI / 4.0);
    let gq = quad(|x| x.sin() * (4.0 * x).sin(), 0.0, PI / 2.0);
    let err = [a - 2.0 / 3.0, aq - 2.0 / 3.0, g + 4.0 / 15.0, gq + 4.0 / 15.0, b - 0.4, aq + gq - 0.4]
        .iter()
        .fold(0.0f64, |m, e| m.max(e.abs()));
    let secs = t.elapsed().as_secs_f64();
    outcome(1, err < 1e-12 && secs < 1.0, format!("alpha, gamma, beta max error {err:.1e}, {secs:.3} s"))
}

fn criterion2() -> Outcome {
    let r = golden::run();
    let bad: Vec<&golden::Check> = r.checks.iter().filter(|c| c.name.starts_with("psi") && !c.pass).collect();
    let detail = if bad.is_empty() {
        "all six current entries within 1e-12".to_string()
    } else {
        bad.iter()
            .map(|c| format!("{} printed {:.6} computed {:.6}", c.name, c.expected, c.computed))
            .collect::<Vec<_>>()
            .join("; ")
    };
    outcome(2, bad.is_empty(), detail)
}

/// The printed vectors are scalar multiples of the computed ones except for
/// psi12 on the left lead (printed 4x) and psi21 on the right lead (printed
/// without the sqrt 2).
fn criterion2_is_the_analysed_red() -> bool {
    let j = example4_junction();
    let cur = |m: usize, n: usize| -> Vec<f64> {
        let pair = junctionlab::spectral::EigenPair { m, n, lambda: (m * m + n * n) as f64, norm: 2.0 / PI };
        j.leads.iter().map(|lead| channel_overlap(&j, &pair, lead, 1) / PI.sqrt()).collect()
    };
    let (c12, c21) = (cur(1, 2), cur(2, 1));
    let (p12, p21) = (psi12_printed(), psi21_printed());
    let r = golden::run();
    let names: Vec<&str> = r.failed.iter().map(|s| s.as_str()).collect();
    names == ["psi12_gamma3", "psi21_gamma1"]
        && (p12[2] / c12[2] - 4.0).abs() < 1e-12
        && (c21[0] / p21[0] - 2f64.sqrt()).abs() < 1e-12
        && (c12[1] - p12[1]).abs() < 1e-12
        && (c21[2] - p21[2]).abs() < 1e-12
}

fn criterion3() -> Outcome {
    let t = Instant::now();
    let idn = g1(8, 40.0);
    let zeros: Vec<f64> = idn.intermediate_eigenvalues(401).unwrap().iter().map(|e| e.lambda).collect();
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for l in linspace(4.2, 5.8, 401) {
        if zeros.iter().any(|z| (l - z).abs() < 1e-4) {
            continue;
        }
        let raw = match m_raw(&idn.rdn, &idn.channels, c(l)) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let comp = idn.compensated_m(c(l)).unwrap();
        worst = worst.max(frob(&(&raw - &comp)) / frob(&raw));
        used += 1;
    }
    let raw_at_5 = m_raw(&idn.rdn, &idn.channels, c(5.0));
    let at5 = idn.compensated_m(c(5.0)).unwrap();
    let finite = at5.iter().all(|z| z.re.is_finite() && z.im.is_finite());
    let secs = t.elapsed().as_secs_f64();
    outcome(
        3,
        worst < 1e-10 && used > 390 && finite && raw_at_5.is_err() && secs < 10.0,
        format!(
            "max relative gap {worst:.1e} over {used} points, raw at 5 is {}, compensated finite {finite}, {secs:.2} s",
            if raw_at_5.is_err() { "singular" } else { "defined" }
        ),
    )
}

fn nd_fixture() -> NdPoleData {
    let pole = |lambda: f64, v: [f64; 6]| Pole { lambda, current: v.to_vec() };
    NdPoleData {
        n_leads: 3,
        l_max: 2,
        poles: vec![
            pole(5.0, [0.4, 0.2, -0.3, 0.1, 0.25, -0.15]),
            pole(5.6, [0.1, -0.3, 0.35, 0.2, -0.2, 0.05]),
            pole(4.6, [-0.2, 0.1, 0.3, -0.1, 0.15, 0.2]),
        ],
        tail: vec![pole(9.0, [0.3, 0.1, 0.2, -0.2, 0.1, 0.1])],
        constant: CMat::from_fn(6, 6, |i, j| c(if i == j { 0.05 } else { 0.01 })),
    }
}

fn criterion4() -> Outcome {
    let nd = nd_fixture();
    let ch = thresholds(&example4_junction(), 2).unwrap();
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for l in linspace(4.2, 5.8, 401) {
        if nd.poles.iter().any(|p| (l - p.lambda).abs() < 1e-4) {
            continue;
        }
        if let (Ok(a), Ok(b)) = (n_raw(&nd, &ch, c(l)), compensated_n(&nd, &ch, c(l))) {
            worst = worst.max(frob(&(&a - &b)) / frob(&a));
            used += 1;
        }
    }
    let finite = nd.poles.iter().all(|p| {
        n_raw(&nd, &ch, c(p.lambda)).is_err()
            && compensated_n(&nd, &ch, c(p.lambda)).map(|m| m.iter().all(|z| z.re.is_finite())).unwrap_or(false)
    });
    outcome(4, worst < 1e-10 && used > 390 && finite, format!("max relative gap {worst:.1e} over {used} points, finite at all 3 poles {finite}"))
}

fn criterion5() -> Outcome {
    let ev = printed_idn().intermediate_eigenvalues(401).unwrap();
    let oracle = shifted_eigenvalue();
    let check_fp = (5.0 - PI * (ALPHA * ALPHA + BETA * BETA) / (4.0 * (16.0 - oracle).sqrt()) - oracle).abs();
    let rank1 = |e: &junctionlab::intermediate::IntermediateEigenvalue| {
        let s = symmetric_eigen(&e.residue()).0;
        let top = s.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        e.multiplicity == 1 && s.iter().filter(|x| x.abs() > 1e-10 * top).count() == 1
    };
    let zeros_ok = ev.len() == 2
        && (ev[0].lambda - oracle).abs() < 1e-10
        && (ev[1].lambda - 5.0).abs() < 1e-10
        && ev.iter().all(rank1)
        && check_fp < 1e-13;
    let geo = g1(8, 40.0);
    let min_dq = linspace(4.5, 5.5, 101)
        .into_iter()
        .map(|l| symmetric_eigen(&geo.dq(l).unwrap()).0.into_iter().fold(f64::INFINITY, f64::min))
        .fold(f64::INFINITY, f64::min);
    outcome(
        5,
        zeros_ok && min_dq > 0.0,
        format!(
            "zeros {:.12} and {:.12} (fixed point {oracle:.12}), residue rank 1; min eig dQ/dlambda on [4.5,5.5] {min_dq:.3e}",
            ev.first().map_or(f64::NAN, |e| e.lambda),
            ev.get(1).map_or(f64::NAN, |e| e.lambda)
        ),
    )
}

fn criterion6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let pipe = Pipeline::new(config()).unwrap();
    let model = pipe.fit().unwrap();
    let eigen = pipe.eigen().unwrap();
    let poles: Vec<(f64, Vec<f64>)> = eigen.iter().flat_map(|e| e.currents.iter().map(move |v| (e.lambda, v.clone()))).collect();
    let k = pipe.k_fermi().unwrap();
    let (lo, hi) = pipe.channels.first_band();
    let scalar = ScalarModel::new(vec![1.0, 1.7, 2.4], Some(vec![0.5, 0.3, 0.2]), 0.4, 0.8, 0.0).unwrap();
    let mut worst = [0.0f64; 5];
    let mut mn: f64 = 0.0;
    let mut energies = 0;
    while energies < 200 {
        let l = rng.gen_range(lo + 1e-3..hi - 1e-3);
        let kp = pipe.channels.k_plus(l).unwrap();
        let m = match pipe.idn.compensated_m(c(l)) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let se = smatrix_pipeline(&pipe.idn, l).unwrap();
        let n = inverse(&m).unwrap();
        let sn = smatrix_from_n(&n, &kp, l).unwrap();
        let sj = jump_start(l, &kp, &poles, &k).unwrap();
        let sm = model.smatrix(&kp, l).unwrap();
        let p = rng.gen_range(0.05..4.0);
        let ss = scalar_smatrix(&scalar, c(p)).unwrap();
        for (w, d) in worst.iter_mut().zip([
            se.unitarity_defect(),
            sn.unitarity_defect(),
            sj.unitarity_defect(),
            sm.unitarity_defect(),
            (ss.norm_sqr() - 1.0).abs(),
        ]) {
            *w = w.max(d);
        }
        mn = mn.max(max_abs(&(&se.s - &sn.s)));
        energies += 1;
    }
    let top = worst.iter().fold(0.0f64, |m, x| m.max(*x));
    outcome(
        6,
        top < 1e-8 && mn < 1e-10,
        format!(
            "defects exact_M {:.1e}, exact_N {:.1e}, jump_start {:.1e}, model {:.1e}, scalar {:.1e}; M vs N {mn:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn criterion7() -> Outcome {
    let pipe = Pipeline::new(config()).unwrap();
    let e = pipe.resonance_near_fermi().unwrap();
    let psi = e.currents[0].clone();
    let p = pipe.channels.k_plus(e.lambda).unwrap()[0];
    let blaschke = jump_start_blaschke(e.lambda, e.lambda, &psi, p).s;
    let datta = datta_limit(e.lambda, e.lambda, &psi, p).unwrap().s;
    let n2: f64 = psi.iter().map(|x| x * x).sum();
    let proj = CMat::from_fn(3, 3, |i, j| c(psi[i] * psi[j] / n2));
    let reflection = eye(3) - &proj * c(2.0);
    let factor = blaschke_theta(e.lambda, e.lambda, psi.iter().map(|x| x * x).sum(), p);
    let datta_gap = max_abs(&(&blaschke - &datta)).max(max_abs(&(&datta - &reflection)));

    let kp = [p; 3];
    let v = datta_projection(-0.7, 3);
    let plug = v.conditions().residual(&v.s, &[1.0; 3]);
    let plug_here = junctionlab::graphvertex::VertexConditions::derivative_parallel(&psi).residual(&datta, &kp);

    let gamma = symmetric_gamma(&symmetric_junction());
    let beta = fit_symmetric_beta(gamma).unwrap();
    let ortho = 2.0 + beta * gamma;
    let ortho_printed = 2.0 + fit_symmetric_beta(GAMMA).unwrap() * GAMMA;
    outcome(
        7,
        factor == c(-1.0) && datta_gap < 1e-14 && plug < 1e-12 && plug_here < 1e-12 && ortho == 0.0 && ortho_printed == 0.0 && beta == -2.0 / gamma,
        format!(
            "at lambda {:.6} factor {factor}, |S - (P_perp - P)| {datta_gap:.1e}; bc residuals {plug:.1e}, {plug_here:.1e}; 2 + beta gamma = {ortho:e}",
            e.lambda
        ),
    )
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&g + g.adjoint()) * c(0.5 * scale)
}

fn criterion8() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut resolvent, mut adjoint, mut herglotz_bad, mut overlap_missed) = (0.0f64, 0.0f64, 0usize, 0usize);
    let mut instances = 0;
    while instances < 100 {
        let n = rng.gen_range(2..=8);
        let d = rng.gen_range(1..=3.min(n / 2));
        let a = InnerHamiltonian::new(random_hermitian(&mut rng, n, 3.0)).unwrap();
        let basis = CMat::from_fn(n, d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let setup: DeficiencySetup = match make_setup(&a, &basis) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let m = random_hermitian(&mut rng, d, 2.0);
        let z = C64::new(rng.gen_range(-4.0..4.0), rng.gen_range(0.2..2.0));
        let w = C64::new(rng.gen_range(-4.0..4.0), rng.gen_range(-2.0..-0.2));
        let (rz, rw) = (setup.krein_resolvent(&m, z).unwrap(), setup.krein_resolvent(&m, w).unwrap());
        let lhs = &rz - &rw;
        let rhs = &rz * &rw * (z - w);
        resolvent = resolvent.max(frob(&(lhs - &rhs)) / frob(&rhs).max(1.0));
        let rzc = setup.krein_resolvent(&m, z.conj()).unwrap();
        adjoint = adjoint.max(frob(&(rzc - rz.adjoint())) / frob(&rz).max(1.0));

        let (_, vecs) = a.spectrum();
        let eig_span = vecs.columns(0, d).into_owned();
        if make_setup(&a, &eig_span).is_ok() {
            overlap_missed += 1;
        }
        instances += 1;
    }
    let mut hrng = ChaCha8Rng::seed_from_u64(88);
    let a = InnerHamiltonian::new(random_hermitian(&mut hrng, 8, 3.0)).unwrap();
    let basis = CMat::from_fn(8, 3, |_, _| C64::new(hrng.gen_range(-1.0..1.0), hrng.gen_range(-1.0..1.0)));
    let setup = make_setup(&a, &basis).unwrap();
    for _ in 0..50 {
        let z = C64::new(hrng.gen_range(-6.0..6.0), hrng.gen_range(0.01..3.0));
        if !imaginary_part_eigenvalues(&setup.weyl(z).unwrap()).iter().all(|&v| v < 0.0) {
            herglotz_bad += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        8,
        resolvent < 1e-10 && adjoint < 1e-10 && herglotz_bad == 0 && overlap_missed == 0 && secs < 30.0,
        format!(
            "resolvent identity {resolvent:.1e}, adjoint symmetry {adjoint:.1e}, sign violations {herglotz_bad}/50, overlap not raised {overlap_missed}/100, {secs:.2} s"
        ),
    )
}

fn criterion9() -> Outcome {
    let pipe = Pipeline::new(config()).unwrap();
    let model = pipe.fit().unwrap();
    let (lo, hi) = pipe.config.interval().window();
    let grid: Vec<f64> =
        linspace(lo, hi, 201).into_iter().filter(|l| model.poles.iter().all(|p| (l - p.lambda).abs() > 1e-6)).collect();
    let check = model.verify_fit(&pipe.channels, &grid).unwrap();
    outcome(
        9,
        check.max_defect < 1e-8 && model.gram_residual < 1e-12,
        format!(
            "max ||S_model - S_delta|| {:.1e} at {:.4} over {} points; Gram residual {:.1e}",
            check.max_defect, check.at, check.points, model.gram_residual
        ),
    )
}

fn criterion10() -> Outcome {
    let model = ScalarModel::new(vec![1.0, 1.7, 2.4], Some(vec![0.5, 0.3, 0.2]), 0.4, 0.8, 0.0).unwrap();
    let set = solve_resonances(&model).unwrap();
    let mut blaschke: f64 = 0.0;
    let mut split: f64 = 0.0;
    for p in linspace(0.05, 4.0, 200) {
        let s = scalar_smatrix(&model, c(p)).unwrap();
        let b = blaschke_product(&set, c(p));
        blaschke = blaschke.max((s - b).norm());
        for s0 in 0..3 {
            let (r, a) = factor_split(&set, s0, c(p)).unwrap();
            split = split.max((r * a - b).norm());
        }
    }
    let symmetry = (1..=3)
        .map(|s| (set.by_origin(-s).unwrap() + set.by_origin(s).unwrap().conj()).norm())
        .fold(0.0f64, f64::max);
    let betas = [0.01, 0.02, 0.04];
    let widths: Vec<f64> =
        betas.iter().map(|&b| solve_resonances(&model.with_beta(b)).unwrap().by_origin(1).unwrap().im.abs()).collect();
    let xs: Vec<f64> = betas.iter().map(|b| b.ln()).collect();
    let ys: Vec<f64> = widths.iter().map(|w| w.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    outcome(
        10,
        blaschke < 1e-8 && symmetry < 1e-12 && (slope - 2.0).abs() < 0.1 && split < 1e-12,
        format!("Blaschke vs S {blaschke:.1e}, symmetry {symmetry:.1e}, width slope {slope:.4}, split {split:.1e}"),
    )
}

/// Largest entry change of the exact S on the window between two truncations.
fn truncation_gap(a: &IntermediateDN, b: &IntermediateDN, grid: &[f64]) -> (f64, f64) {
    let mut worst = (0.0, f64::NAN);
    for &l in grid {
        if let (Ok(x), Ok(y)) = (smatrix_pipeline(a, l), smatrix_pipeline(b, l)) {
            let d = max_abs(&(x.s - y.s));
            if d > worst.0 {
                worst = (d, l);
            }
        }
    }
    worst
}

struct Convergence {
    gaps: Vec<(usize, f64, f64)>,
    order: f64,
}

fn convergence_study() -> Convergence {
    let cfg = config();
    let (lo, hi) = cfg.interval().window();
    let grid = linspace(lo, hi, 51);
    let levels = [(8, 40.0), (16, 80.0), (32, 80.0)];
    let idns: Vec<IntermediateDN> = levels.iter().map(|&(l, cut)| g1(l, cut)).collect();
    let gaps: Vec<(usize, f64, f64)> = (0..2)
        .map(|i| {
            let (g, at) = truncation_gap(&idns[i], &idns[i + 1], &grid);
            (levels[i].0, g, at)
        })
        .collect();
    let order = (gaps[0].1 / gaps[1].1).log2();
    Convergence { gaps, order }
}

fn criterion11(study: &Convergence) -> Outcome {
    let cut_only = {
        let cfg = config();
        let (lo, hi) = cfg.interval().window();
        truncation_gap(&g1(8, 40.0), &g1(8, 80.0), &linspace(lo, hi, 11)).0
    };
    let (_, gap, at) = study.gaps[0];
    let needed = 8.0 * (gap / 1e-3).powf(1.0 / study.order);
    outcome(
        11,
        gap < 1e-3,
        format!(
            "l_max 8->16 with cut 40->80 moves S by {gap:.2e} (at {at:.3}); 16->32 by {:.2e}; cut alone {cut_only:.1e}; observed order {:.2}, tolerance reached near l_max {:.0}",
            study.gaps[1].1, study.order, needed
        ),
    )
}

fn criterion11_is_the_analysed_red(study: &Convergence) -> bool {
    let (g0, g1) = (study.gaps[0].1, study.gaps[1].1);
    g0 > 1e-3 && g0 < 1e-2 && g1 < g0 && study.order > 0.8 && study.order < 2.0
}

fn main() {
    let t = Instant::now();
    let study = convergence_study();
    let results = vec![
        criterion1(),
        criterion2(),
        criterion3(),
        criterion4(),
        criterion5(),
        criterion6(),
        criterion7(),
        criterion8(),
        criterion9(),
        criterion10(),
        criterion11(&study),
    ];
    println!("acceptance criteria");
    for r in &results {
        println!("criterion {:>2}: {}  {}", r.id, if r.pass { "PASS" } else { "FAIL" }, r.detail);
    }
    let analysed = |id: usize| match id {
        2 => criterion2_is_the_analysed_red(),
        11 => criterion11_is_the_analysed_red(&study),
        _ => false,
    };
    let mut unexpected = Vec::new();
    for r in &results {
        let known = matches!(r.id, 2 | 11);
        if r.pass == known {
            unexpected.push(r.id);
        } else if !r.pass && !analysed(r.id) {
            unexpected.push(r.id);
        }
    }
    let passed = results.iter().filter(|r| r.pass).count();
    println!("{passed}/{} green; red with analysis: 2 (printed current entries), 11 (algebraic l_max convergence)", results.len());
    println!("elapsed {:.1} s", t.elapsed().as_secs_f64());
    if !unexpected.is_empty() {
        println!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
