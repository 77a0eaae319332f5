//! Compensated Krein formulas for the intermediate DN- and ND-maps, the
//! energy-dependent potential `Q(λ)`, the denominator `d(λ)` and the
//! eigenvalues of the intermediate Hamiltonian with their residues.
//!
//! With `B = 𝓚^Δ_{--} + K_-` and `C_±` the matrices whose rows are the open
//! and closed currents of the eigenfunctions in `Δ`:
//!
//! * `Q = C_- B^{-1} C_-ᵀ`, `d = λ - L^Δ + Q`;
//! * `𝓙𝓣⁺ = C_+ᵀ - 𝓚^Δ_{+-} B^{-1} C_-ᵀ`;
//! * `k = 𝓚^Δ_{++} - 𝓚^Δ_{+-} B^{-1} 𝓚^Δ_{-+}`;
//! * `𝓜 = k + 𝓙𝓣⁺ d^{-1} (𝓙𝓣⁺)ᵀ`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dnmap::{aggregate_n_raw, frame, Blocks, Pole, RationalDN};
use crate::error::{Error, Result};
use crate::geometry::ChannelSet;
use crate::linalg::{c, diag, eye, linspace, singular_values, solve, symmetric_eigen, CMat, RMat};

#[derive(Clone, Debug)]
pub struct IntermediateDN {
    pub rdn: RationalDN,
    pub channels: ChannelSet,
    /// Diagonal of `L^Δ`.
    pub lambdas: Vec<f64>,
    c_plus: CMat,
    c_minus: CMat,
}

/// Everything the compensated formula needs at one energy.
#[derive(Clone, Debug)]
pub struct Pieces {
    pub q: CMat,
    pub d: CMat,
    pub jt: CMat,
    pub k: CMat,
}

impl IntermediateDN {
    pub fn new(rdn: RationalDN, channels: ChannelSet) -> Result<Self> {
        if channels.n_leads() != rdn.n_leads || channels.l_max != rdn.l_max {
            return Err(Error::Input("channel set does not match the split DN map".into()));
        }
        let n = rdn.poles.len();
        let dim = rdn.dim();
        let mut cur = CMat::zeros(n, dim);
        for (s, p) in rdn.poles.iter().enumerate() {
            for j in 0..dim {
                cur[(s, j)] = c(p.current[j]);
            }
        }
        let open: Vec<usize> = (0..rdn.n_leads).map(|m| rdn.open_index(m)).collect();
        let closed = rdn.closed_indices();
        let c_plus = cur.select_columns(open.iter());
        let c_minus = cur.select_columns(closed.iter());
        let lambdas = rdn.poles.iter().map(|p| p.lambda).collect();
        Ok(IntermediateDN { rdn, channels, lambdas, c_plus, c_minus })
    }

    /// Number of eigenvalues in `Δ`.
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn open_dim(&self) -> usize {
        self.rdn.n_leads
    }

    pub fn open_currents(&self) -> &CMat {
        &self.c_plus
    }

    pub fn closed_currents(&self) -> &CMat {
        &self.c_minus
    }

    pub fn pieces(&self, z: C64) -> Result<Pieces> {
        let reg = self.rdn.regular_blocks(z);
        let b = &reg.mm + diag(&self.channels.k_minus_c(z));
        let rhs = {
            let mut r = CMat::zeros(b.nrows(), self.n() + self.open_dim());
            r.columns_mut(0, self.n()).copy_from(&self.c_minus.transpose());
            r.columns_mut(self.n(), self.open_dim()).copy_from(&reg.mp);
            r
        };
        let x = solve(&b, &rhs).ok_or(Error::DenominatorSingular(z.re))?;
        let x_c = x.columns(0, self.n()).into_owned();
        let x_k = x.columns(self.n(), self.open_dim()).into_owned();
        let q = &self.c_minus * &x_c;
        let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            self.n(),
            self.lambdas.iter().map(|&l| z - l),
        )) + &q;
        let jt = self.c_plus.transpose() - &reg.pm * &x_c;
        let k = &reg.pp - &reg.pm * &x_k;
        Ok(Pieces { q, d, jt, k })
    }

    /// `Q(λ) = 𝓣(𝓚^Δ_{--} + K_-)^{-1}𝓣⁺`.
    pub fn potential_q(&self, z: C64) -> Result<CMat> {
        Ok(self.pieces(z)?.q)
    }

    /// `d(λ) = λ - L^Δ + Q(λ)`.
    pub fn denominator_d(&self, z: C64) -> Result<CMat> {
        Ok(self.pieces(z)?.d)
    }

    /// Regular part `k(λ)` of the compensated formula.
    pub fn k_regular(&self, z: C64) -> Result<CMat> {
        Ok(self.pieces(z)?.k)
    }

    pub fn compensated_m(&self, z: C64) -> Result<CMat> {
        let p = self.pieces(z)?;
        let s = singular_values(&p.d);
        if let (Some(&hi), Some(&lo)) = (s.first(), s.last()) {
            if lo <= 1e-14 * hi.max(1.0) {
                return Err(Error::IntermediatePole(z.re));
            }
        }
        let y = solve(&p.d, &p.jt.transpose()).ok_or(Error::IntermediatePole(z.re))?;
        Ok(p.k + &p.jt * y)
    }

    fn real_d(&self, lambda: f64) -> Result<RMat> {
        Ok(self.denominator_d(c(lambda))?.map(|z| z.re))
    }

    /// Central-difference `∂Q/∂λ` at a real energy.
    pub fn dq(&self, lambda: f64) -> Result<RMat> {
        let h = 1e-5 * lambda.abs().max(1.0);
        let qp = self.potential_q(c(lambda + h))?.map(|z| z.re);
        let qm = self.potential_q(c(lambda - h))?.map(|z| z.re);
        Ok((qp - qm) / (2.0 * h))
    }

    /// Zeros of `det d` in `Δ` with their residue data, from a `points` grid.
    pub fn intermediate_eigenvalues(&self, points: usize) -> Result<Vec<IntermediateEigenvalue>> {
        let n = self.n();
        if n == 0 {
            return Ok(Vec::new());
        }
        let grid = linspace(self.rdn.lo, self.rdn.hi, points.max(3));
        let branches: Vec<Option<Vec<f64>>> = grid
            .iter()
            .map(|&l| self.real_d(l).ok().map(|d| symmetric_eigen(&d).0))
            .collect();
        let mut roots: Vec<f64> = Vec::new();
        for i in 0..grid.len() - 1 {
            let (Some(ma), Some(mb)) = (&branches[i], &branches[i + 1]) else { continue };
            for k in 0..n {
                let (fa, fb) = (ma[k], mb[k]);
                if fa == 0.0 {
                    roots.push(grid[i]);
                } else if fb != 0.0 && fa * fb < 0.0 {
                    if let Some(r) = self.bisect(k, grid[i], grid[i + 1], fa) {
                        roots.push(r);
                    }
                }
            }
        }
        if let Some(Some(mb)) = branches.last() {
            if mb.iter().any(|&v| v == 0.0) {
                roots.push(*grid.last().unwrap());
            }
        }
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut merged: Vec<f64> = Vec::new();
        for r in roots {
            if merged.last().map_or(true, |&m| (r - m).abs() > 1e-9) {
                merged.push(r);
            }
        }
        merged.into_iter().map(|l| self.eigen_data(l)).collect()
    }

    fn bisect(&self, k: usize, mut a: f64, mut b: f64, mut fa: f64) -> Option<f64> {
        let branch = |l: f64| self.real_d(l).ok().map(|d| symmetric_eigen(&d).0[k]);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if b - a < 1e-12 {
                break;
            }
            let fm = branch(m)?;
            if fm == 0.0 {
                return Some(m);
            }
            if fa * fm < 0.0 {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
        }
        let mut x = 0.5 * (a + b);
        for _ in 0..3 {
            let d = self.real_d(x).ok()?;
            let (vals, vecs) = symmetric_eigen(&d);
            let nu = vecs.column(k).into_owned();
            let dd = RMat::identity(self.n(), self.n()) + self.dq(x).ok()?;
            let slope = (nu.transpose() * dd * &nu)[(0, 0)];
            let next = x - vals[k] / slope;
            let improves = branch(next).map_or(false, |f| f.abs() < vals[k].abs());
            if !improves || !(next > a - 1e-9 && next < b + 1e-9) {
                break;
            }
            x = next;
        }
        Some(x)
    }

    fn eigen_data(&self, lambda: f64) -> Result<IntermediateEigenvalue> {
        let d = self.real_d(lambda)?;
        let (vals, vecs) = symmetric_eigen(&d);
        let scale = d.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
        let null: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].abs() < 1e-8 * scale).collect();
        let null = if null.is_empty() {
            let i = (0..vals.len()).min_by(|&i, &j| vals[i].abs().partial_cmp(&vals[j].abs()).unwrap()).unwrap();
            vec![i]
        } else {
            null
        };
        let nu = vecs.select_columns(null.iter());
        let dd = RMat::identity(self.n(), self.n()) + self.dq(lambda)?;
        let g = nu.transpose() * &dd * &nu;
        let (gv, gw) = symmetric_eigen(&g);
        let jt = self.pieces(c(lambda))?.jt.map(|z| z.re);
        let mut currents = Vec::new();
        let mut weights = Vec::new();
        for (i, &gi) in gv.iter().enumerate() {
            let dir = &nu * gw.column(i);
            let psi = &jt * &dir / gi.sqrt();
            currents.push(psi.iter().cloned().collect::<Vec<f64>>());
            weights.push(1.0 / gi);
        }
        let jn = &jt * &nu;
        let gram = jn.transpose() * &jn;
        let wronskian = crate::linalg::det_real(&gram);
        let col_norms: f64 = (0..jn.ncols()).map(|j| jn.column(j).norm_squared()).product();
        let degenerate = col_norms == 0.0 || wronskian.abs() < 1e-10 * col_norms;
        if degenerate {
            log::warn!("residue at {lambda} may lose rank: Wronskian {wronskian:e}");
        }
        Ok(IntermediateEigenvalue {
            lambda,
            multiplicity: null.len(),
            null_space: nu,
            currents,
            weights,
            wronskian,
            degenerate,
        })
    }
}

#[derive(Clone, Debug)]
pub struct IntermediateEigenvalue {
    pub lambda: f64,
    pub multiplicity: usize,
    /// Columns span the kernel of `d(λ^Q)`.
    pub null_space: RMat,
    /// `ψ_r` with residue of `𝓜` equal to `Σ_r ψ_r ψ_rᵀ`.
    pub currents: Vec<Vec<f64>>,
    /// Eigenvalues of `[νᵀ(I + ∂Q/∂λ)ν]^{-1}`.
    pub weights: Vec<f64>,
    pub wronskian: f64,
    pub degenerate: bool,
}

impl IntermediateEigenvalue {
    /// Residue dyad `Σ_r ψ_r ψ_rᵀ`.
    pub fn residue(&self) -> RMat {
        let m = self.currents.first().map_or(0, |v| v.len());
        let mut out = RMat::zeros(m, m);
        for v in &self.currents {
            let v = nalgebra::DVector::from_column_slice(v);
            out += &v * v.transpose();
        }
        out
    }

    pub fn report(&self) -> EigenvalueReport {
        EigenvalueReport {
            lambda: self.lambda,
            multiplicity: self.multiplicity,
            residue_norms: self.currents.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>()).collect(),
            wronskian: self.wronskian,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenvalueReport {
    pub lambda: f64,
    pub multiplicity: usize,
    pub residue_norms: Vec<f64>,
    pub wronskian: f64,
}

/// ND-map data: `ND(λ) = Σ_{Δ₂} ψ_s ψ_sᵀ/(λ_s - λ) + 𝓚̃(λ)` with
/// `𝓚̃(λ) = Σ_tail ψ_t ψ_tᵀ/(λ_t - λ) + constant`.
#[derive(Clone, Debug)]
pub struct NdPoleData {
    pub n_leads: usize,
    pub l_max: usize,
    pub poles: Vec<Pole>,
    pub tail: Vec<Pole>,
    pub constant: CMat,
}

impl NdPoleData {
    pub fn dim(&self) -> usize {
        self.n_leads * self.l_max
    }

    fn sum(poles: &[Pole], z: C64, dim: usize) -> CMat {
        let mut out = CMat::zeros(dim, dim);
        for p in poles {
            let w = c(1.0) / (c(p.lambda) - z);
            for i in 0..dim {
                for j in 0..dim {
                    out[(i, j)] += w * (p.current[i] * p.current[j]);
                }
            }
        }
        out
    }

    pub fn regular(&self, z: C64) -> CMat {
        Self::sum(&self.tail, z, self.dim()) + &self.constant
    }

    pub fn full(&self, z: C64) -> Result<CMat> {
        if z.im == 0.0 {
            if let Some(i) = self.poles.iter().chain(&self.tail).position(|p| p.lambda == z.re) {
                return Err(Error::Pole { lambda: z.re, index: i });
            }
        }
        Ok(Self::sum(&self.poles, z, self.dim()) + self.regular(z))
    }

    pub fn blocks(&self, z: C64) -> Result<Blocks> {
        Ok(frame(&self.full(z)?, self.n_leads, self.l_max))
    }
}

/// Raw `𝓝` from the framed ND map.
pub fn n_raw(nd: &NdPoleData, channels: &ChannelSet, z: C64) -> Result<CMat> {
    let b = nd.blocks(z)?;
    Ok(aggregate_n_raw(&b, &channels.k_minus_c(z), z.re)?.matrix)
}

/// `𝓝 = 𝓝_reg + 𝓙̃𝓣̃⁺ [L^{Δ₂} - λ + V(λ)]^{-1} (𝓙̃𝓣̃⁺)ᵀ` with
/// `V = T̃_- K_- G^{-1} T̃_-ᵀ`, `G = I + 𝓚̃_{--}K_-`.
pub fn compensated_n(nd: &NdPoleData, channels: &ChannelSet, z: C64) -> Result<CMat> {
    let reg = frame(&nd.regular(z), nd.n_leads, nd.l_max);
    let km = diag(&channels.k_minus_c(z));
    let g = eye(km.nrows()) + &reg.mm * &km;
    let n = nd.poles.len();
    let open: Vec<usize> = (0..nd.n_leads).map(|m| m * nd.l_max).collect();
    let closed: Vec<usize> = (0..nd.n_leads).flat_map(|m| (1..nd.l_max).map(move |l| m * nd.l_max + l)).collect();
    let tp = CMat::from_fn(n, open.len(), |s, j| c(nd.poles[s].current[open[j]]));
    let tm = CMat::from_fn(n, closed.len(), |s, j| c(nd.poles[s].current[closed[j]]));
    let mut rhs = CMat::zeros(g.nrows(), n + open.len());
    rhs.columns_mut(0, n).copy_from(&tm.transpose());
    rhs.columns_mut(n, open.len()).copy_from(&reg.mp);
    let x = solve(&g, &rhs).ok_or(Error::NeumannThinViolated(z.re))?;
    let y = &km * x;
    let y_t = y.columns(0, n).into_owned();
    let y_k = y.columns(n, open.len()).into_owned();
    let v = &tm * &y_t;
    let w = CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, nd.poles.iter().map(|p| c(p.lambda) - z))) + v;
    let jt = tp.transpose() - &reg.pm * &y_t;
    let n_reg = &reg.pp - &reg.pm * &y_k;
    let sol = solve(&w, &jt.transpose()).ok_or(Error::IntermediatePole(z.re))?;
    Ok(n_reg + &jt * sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dnmap::{m_raw, split_dn, split_rectangle};
    use crate::geometry::thresholds;
    use crate::linalg::frob;
    use crate::tjunction::{example4_junction, example4_printed_data, shifted_eigenvalue, ALPHA, BETA};
    use std::f64::consts::PI;

    fn printed() -> IntermediateDN {
        let data = example4_printed_data();
        let ch = thresholds(&example4_junction(), 2).unwrap();
        IntermediateDN::new(split_dn(&data, (4.0, 6.0), 40.0, 2).unwrap(), ch).unwrap()
    }

    #[test]
    fn printed_potential_matches_closed_form() {
        let idn = printed();
        let l = 5.3;
        let q = idn.potential_q(c(l)).unwrap();
        let f = PI / (4.0 * (16.0 - l).sqrt());
        let want = [[ALPHA * ALPHA, -ALPHA * BETA], [-ALPHA * BETA, BETA * BETA]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((q[(i, j)].re - f * want[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn printed_zeros_are_five_and_the_shifted_value() {
        let ev = printed().intermediate_eigenvalues(1001).unwrap();
        assert_eq!(ev.len(), 2);
        assert!((ev[0].lambda - shifted_eigenvalue()).abs() < 1e-10);
        assert!((ev[1].lambda - 5.0).abs() < 1e-12);
        assert!(ev.iter().all(|e| e.multiplicity == 1));
    }

    #[test]
    fn compensated_matches_raw_and_is_finite_at_the_pole() {
        let idn = printed();
        let ch = idn.channels.clone();
        for &l in &[4.3, 4.7, 5.2, 5.9] {
            let a = m_raw(&idn.rdn, &ch, c(l)).unwrap();
            let b = idn.compensated_m(c(l)).unwrap();
            assert!(frob(&(&a - &b)) < 1e-10 * frob(&a));
        }
        let at = idn.compensated_m(c(5.0));
        assert!(at.is_err() || at.unwrap().iter().all(|z| z.re.is_finite()));
    }

    #[test]
    fn residue_matches_limit() {
        let j = example4_junction();
        let ch = thresholds(&j, 4).unwrap();
        let idn = IntermediateDN::new(split_rectangle(&j, (4.0, 6.0), 40.0, 4).unwrap(), ch).unwrap();
        let ev = idn.intermediate_eigenvalues(401).unwrap();
        assert!(!ev.is_empty());
        for e in &ev {
            let res = e.residue();
            let lim = |h: f64| idn.compensated_m(c(e.lambda + h)).unwrap().map(|z| z.re) * h;
            let r = 2.0 * lim(1e-6) - lim(2e-6);
            let err = (r - &res).abs().max();
            assert!(err < 1e-5 * res.abs().max().max(1e-3), "{} {err}", e.lambda);
        }
    }

    #[test]
    fn zero_closed_coupling_gives_zero_potential() {
        let mut data = example4_printed_data();
        let rows: Vec<Vec<Vec<f64>>> = (0..data.len())
            .map(|s| data.currents.rows(s).into_iter().map(|r| vec![r[0], 0.0]).collect())
            .collect();
        data.currents = crate::spectral::CurrentCoefficients::from_rows(3, 2, rows).unwrap();
        let ch = thresholds(&example4_junction(), 2).unwrap();
        let idn = IntermediateDN::new(split_dn(&data, (4.0, 6.0), 40.0, 2).unwrap(), ch).unwrap();
        assert!(frob(&idn.potential_q(c(5.5)).unwrap()) == 0.0);
        let ev = idn.intermediate_eigenvalues(1001).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].lambda, 5.0);
        assert_eq!(ev[0].multiplicity, 2);
    }

    fn nd_fixture() -> (NdPoleData, ChannelSet) {
        let pole = |lambda: f64, v: [f64; 6]| Pole { lambda, current: v.to_vec() };
        let nd = NdPoleData {
            n_leads: 3,
            l_max: 2,
            poles: vec![
                pole(5.0, [0.4, 0.2, -0.3, 0.1, 0.25, -0.15]),
                pole(5.6, [0.1, -0.3, 0.35, 0.2, -0.2, 0.05]),
                pole(4.6, [-0.2, 0.1, 0.3, -0.1, 0.15, 0.2]),
            ],
            tail: vec![pole(9.0, [0.3, 0.1, 0.2, -0.2, 0.1, 0.1])],
            constant: CMat::from_fn(6, 6, |i, j| c(if i == j { 0.05 } else { 0.01 })),
        };
        (nd, thresholds(&example4_junction(), 2).unwrap())
    }

    #[test]
    fn compensated_n_matches_raw() {
        let (nd, ch) = nd_fixture();
        for &l in &[4.3, 4.8, 5.3, 5.8] {
            let a = n_raw(&nd, &ch, c(l)).unwrap();
            let b = compensated_n(&nd, &ch, c(l)).unwrap();
            assert!(frob(&(&a - &b)) < 1e-10 * frob(&a), "{l}");
        }
        assert!(n_raw(&nd, &ch, c(5.0)).is_err());
        assert!(compensated_n(&nd, &ch, c(5.0)).unwrap().iter().all(|z| z.re.is_finite()));
    }
}
