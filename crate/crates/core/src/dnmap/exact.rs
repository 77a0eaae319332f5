//! Closed-form Dirichlet-to-Neumann map of a rectangular well, projected on
//! the lead cross-section modes.
//!
//! Boundary data on one side is expanded in the sine basis of that side; each
//! tangential mode continues into the well as `sinh(κ ξ)/sinh(κ L)` with
//! `κ² = (nπ/L_t)² + V - z`. The normal derivative on every lead is then
//! summed over the tangential index. The slowly decaying large-index part of
//! these sums does not depend on `z` to leading order, so it is evaluated once
//! at `z = V` with many terms and only the difference is summed at each `z`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::geometry::{Junction, Lead, Side};
use crate::linalg::{gauss_legendre, CMat};
use crate::spectral::sine_overlap;

const N_STATIC: usize = 20_000;
const N_DYNAMIC: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Relation {
    Same,
    Opposite,
    /// Test lead on a side adjacent to the data side. `far` is true when that
    /// side sits at the far end of the tangential range, `flip` when the
    /// normal coordinate runs against the test side's own coordinate.
    Adjacent { far: bool, flip: bool },
}

fn relation(data: Side, test: Side) -> Relation {
    use Side::*;
    if data == test {
        return Relation::Same;
    }
    let flip = matches!(data, Left | Bottom);
    match (data, test) {
        (Right, Left) | (Left, Right) | (Top, Bottom) | (Bottom, Top) => Relation::Opposite,
        (Right | Left, Bottom) | (Top | Bottom, Left) => Relation::Adjacent { far: false, flip },
        _ => Relation::Adjacent { far: true, flip },
    }
}

#[derive(Clone, Debug)]
pub struct RectangleDn {
    a: f64,
    b: f64,
    v: f64,
    leads: Vec<Lead>,
    l_max: usize,
    /// `g[m][l-1][n-1]`: coefficient of mode `l` of lead `m` on the normalized
    /// sine `n` of its own side.
    g: Vec<Vec<Vec<f64>>>,
    base: CMat,
    quad: (Vec<f64>, Vec<f64>),
}

impl RectangleDn {
    pub fn new(junction: &Junction, l_max: usize) -> Self {
        let mut r = RectangleDn {
            a: junction.a,
            b: junction.b,
            v: junction.v_well,
            leads: junction.leads.clone(),
            l_max,
            g: Vec::new(),
            base: CMat::zeros(0, 0),
            quad: gauss_legendre(48),
        };
        r.g = r
            .leads
            .iter()
            .map(|lead| {
                let lt = r.tangential(lead.side);
                let norm = (2.0 / lead.width).sqrt() * (2.0 / lt).sqrt();
                (1..=l_max)
                    .map(|l| {
                        (1..=N_STATIC)
                            .map(|n| norm * sine_overlap(n as f64 * PI / lt, lead.start, l, lead.width))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        r.base = r.partial(C64::new(r.v, 0.0), N_STATIC);
        r
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    fn tangential(&self, side: Side) -> f64 {
        if side.horizontal() {
            self.a
        } else {
            self.b
        }
    }

    fn normal_length(&self, side: Side) -> f64 {
        if side.horizontal() {
            self.b
        } else {
            self.a
        }
    }

    /// Full channel matrix, index `m * l_max + (l - 1)`.
    pub fn eval(&self, z: C64) -> CMat {
        let v = C64::new(self.v, 0.0);
        let d = &self.base + self.partial(z, N_DYNAMIC) - self.partial(v, N_DYNAMIC);
        (&d + d.transpose()).scale(0.5)
    }

    /// Eigenvalues of the well up to `cut`, with multiplicity.
    pub fn spectrum(&self, cut: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for m in 1.. {
            let xm = (m as f64 * PI / self.a).powi(2) + self.v;
            if xm + (PI / self.b).powi(2) > cut {
                break;
            }
            for n in 1.. {
                let l = xm + (n as f64 * PI / self.b).powi(2);
                if l > cut {
                    break;
                }
                out.push(l);
            }
        }
        out.sort_by(|x, y| x.partial_cmp(y).unwrap());
        out
    }

    fn partial(&self, z: C64, n_terms: usize) -> CMat {
        let dim = self.leads.len() * self.l_max;
        let mut out = CMat::zeros(dim, dim);
        for (mb, lb) in self.leads.iter().enumerate() {
            let lt = self.tangential(lb.side);
            let ln = self.normal_length(lb.side);
            for n in 1..=n_terms {
                let kt = n as f64 * PI / lt;
                let kap = (C64::new(kt * kt + self.v, 0.0) - z).sqrt();
                let h = Hyper::new(kap, ln);
                for (ma, la) in self.leads.iter().enumerate() {
                    match relation(lb.side, la.side) {
                        Relation::Same | Relation::Opposite => {
                            let f = if la.side == lb.side { h.coth } else { -h.csch };
                            for l1 in 0..self.l_max {
                                let ga = self.g[ma][l1][n - 1];
                                if ga == 0.0 {
                                    continue;
                                }
                                for l2 in 0..self.l_max {
                                    out[(ma * self.l_max + l1, mb * self.l_max + l2)] +=
                                        f * (ga * self.g[mb][l2][n - 1]);
                                }
                            }
                        }
                        Relation::Adjacent { far, flip } => {
                            let sigma = if far {
                                if n % 2 == 0 {
                                    1.0
                                } else {
                                    -1.0
                                }
                            } else {
                                -1.0
                            };
                            let pref = sigma * (2.0 / lt).sqrt() * kt;
                            for l1 in 1..=self.l_max {
                                let i = self.adjacent_integral(&h, la, l1, flip) * pref;
                                for l2 in 0..self.l_max {
                                    out[(ma * self.l_max + l1 - 1, mb * self.l_max + l2)] +=
                                        i * self.g[mb][l2][n - 1];
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// `∫ e_l(s) sinh(κ ξ(s))/sinh(κ L) ds` over the test lead.
    fn adjacent_integral(&self, h: &Hyper, lead: &Lead, l: usize, flip: bool) -> C64 {
        let q = PI * l as f64 / lead.width;
        let norm = (2.0 / lead.width).sqrt();
        let sgn = if l % 2 == 0 { 1.0 } else { -1.0 };
        let den = h.kap * h.kap + q * q;
        if den.norm() < 1e-6 * q * q {
            let (x, w) = &self.quad;
            let half = 0.5 * lead.width;
            let mut acc = C64::new(0.0, 0.0);
            for (xi, wi) in x.iter().zip(w) {
                let t = half * (xi + 1.0);
                let s = if flip { h.len - lead.start - t } else { lead.start + t };
                acc += h.ratio(s) * (wi * half * norm * (q * t).sin());
            }
            return acc;
        }
        if flip {
            let (x0, x1) = (h.len - lead.end(), h.len - lead.start);
            (h.ratio(x0) - h.ratio(x1) * sgn) * (q / den) * (-sgn * norm)
        } else {
            (h.ratio(lead.start) - h.ratio(lead.end()) * sgn) * (q / den) * norm
        }
    }
}

/// Hyperbolic factors for one tangential mode, written with `exp(-κL)` so
/// that large `κ` does not overflow.
struct Hyper {
    kap: C64,
    len: f64,
    den: C64,
    coth: C64,
    csch: C64,
}

impl Hyper {
    fn new(kap: C64, len: f64) -> Self {
        let e1 = (-kap * len).exp();
        let e2 = e1 * e1;
        let den = C64::new(1.0, 0.0) - e2;
        let (coth, csch) = if kap.norm() < 1e-8 {
            let k2 = kap * kap;
            (C64::new(1.0 / len, 0.0) + k2 * (len / 3.0), C64::new(1.0 / len, 0.0) - k2 * (len / 6.0))
        } else {
            (kap * (C64::new(1.0, 0.0) + e2) / den, kap * e1 * 2.0 / den)
        };
        Hyper { kap, len, den, coth, csch }
    }

    /// `sinh(κ x)/sinh(κ L)`.
    fn ratio(&self, x: f64) -> C64 {
        if self.kap.norm() < 1e-8 {
            return C64::new(x / self.len, 0.0);
        }
        (((x - self.len) * self.kap).exp() - (-(x + self.len) * self.kap).exp()) / self.den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_junction, JunctionSpec, LeadSpec, WellSpec};
    use crate::spectral::EigenData;

    fn t_junction() -> Junction {
        build_junction(JunctionSpec {
            well: WellSpec { a: PI, b: PI, v: 0.0 },
            leads: vec![
                LeadSpec { side: Side::Right, offset: PI / 4.0, width: PI / 2.0 },
                LeadSpec { side: Side::Top, offset: PI / 4.0, width: PI / 2.0 },
                LeadSpec { side: Side::Left, offset: 0.0, width: PI / 2.0 },
                LeadSpec { side: Side::Bottom, offset: 0.3, width: 0.9 },
            ],
            v_lead: 0.0,
        })
        .unwrap()
    }

    #[test]
    fn matrix_is_symmetric_before_symmetrization() {
        let j = t_junction();
        let dn = RectangleDn::new(&j, 3);
        let z = C64::new(6.3, 0.2);
        let raw = &dn.base + dn.partial(z, N_DYNAMIC) - dn.partial(C64::new(0.0, 0.0), N_DYNAMIC);
        let asym = (&raw - raw.transpose()).iter().map(|x| x.norm()).fold(0.0, f64::max);
        assert!(asym < 1e-7, "asymmetry {asym}");
    }

    #[test]
    fn residue_matches_eigenfunction_currents() {
        let j = t_junction();
        let dn = RectangleDn::new(&j, 3);
        let data = EigenData::rectangle(&j, 6.0, 3);
        let mut res = CMat::zeros(12, 12);
        let k = 64;
        for i in 0..k {
            let w = C64::from_polar(0.3, 2.0 * PI * i as f64 / k as f64);
            res += dn.eval(C64::new(5.0, 0.0) + w) * (w / k as f64);
        }
        let mut want = CMat::zeros(12, 12);
        for s in 0..data.len() {
            if (data.lambdas[s] - 5.0).abs() < 1e-9 {
                let c = data.currents.full(s);
                for p in 0..12 {
                    for q in 0..12 {
                        want[(p, q)] += C64::new(c[p] * c[q], 0.0);
                    }
                }
            }
        }
        let err = (&res - &want).iter().map(|x| x.norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "residue error {err}");
    }

    #[test]
    fn imaginary_part_is_sign_definite() {
        let j = t_junction();
        let dn = RectangleDn::new(&j, 3);
        let m = dn.eval(C64::new(7.0, 0.5));
        let im = m.map(|z| C64::new(z.im, 0.0));
        let (vals, _) = crate::linalg::hermitian_eigen(&im);
        assert!(vals.iter().all(|&v| v < 1e-12));
    }
}
