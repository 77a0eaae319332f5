//! Finite-dimensional symplectic extension toolkit: restriction of a
//! Hermitian matrix by a deficiency subspace, symplectic coordinates, the
//! boundary form, the abstract Weyl function and the Krein resolvent.
//!
//! Everything is written in an orthonormal basis `Q` of `N_i`; vectors of
//! `N_i` are handled through their coordinates in that basis.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{c, det, eye, orthonormal_columns, singular_values, solve, CMat, CVec};

const OVERLAP_TOL: f64 = 1e-10;

/// `A = Σ_r α_r² ν_r⟩⟨ν_r`.
#[derive(Clone, Debug)]
pub struct InnerHamiltonian {
    pub a: CMat,
}

impl InnerHamiltonian {
    pub fn new(a: CMat) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Input("inner Hamiltonian must be square".into()));
        }
        let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if crate::linalg::hermiticity_defect(&a) > 1e-14 * scale {
            return Err(Error::Input("inner Hamiltonian is not Hermitian".into()));
        }
        Ok(InnerHamiltonian { a })
    }

    pub fn diagonal(alpha2: &[f64]) -> Self {
        InnerHamiltonian { a: CMat::from_diagonal(&CVec::from_iterator(alpha2.len(), alpha2.iter().map(|&x| c(x)))) }
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// Eigenvalues `α_r²` (ascending) and eigenvectors.
    pub fn spectrum(&self) -> (Vec<f64>, CMat) {
        crate::linalg::hermitian_eigen(&self.a)
    }
}

#[derive(Clone, Debug)]
pub struct DeficiencySetup {
    pub a: CMat,
    /// Orthonormal basis `f_s` of `N_i`.
    pub q: CMat,
    /// `f̂_s = (A + i)(A - i)^{-1} f_s`, an orthonormal basis of `N_{-i}`.
    pub q_dual: CMat,
    /// `W_s^+ = A(A - i)^{-1} f_s`.
    pub w_plus: CMat,
    /// `W_s^- = -(A - i)^{-1} f_s`.
    pub w_minus: CMat,
    /// Sine of the smallest principal angle between `N_i` and `N_{-i}`.
    pub overlap: f64,
}

pub fn make_setup(a: &InnerHamiltonian, basis: &CMat) -> Result<DeficiencySetup> {
    let setup = make_setup_unchecked(a, basis)?;
    if setup.overlap < OVERLAP_TOL {
        return Err(Error::Overlap(setup.overlap));
    }
    Ok(setup)
}

/// Same as [`make_setup`] but only records the principal-angle sine; the
/// Weyl function is still well defined when the subspaces overlap.
pub fn make_setup_unchecked(a: &InnerHamiltonian, basis: &CMat) -> Result<DeficiencySetup> {
    let n = a.dim();
    if basis.nrows() != n || basis.ncols() == 0 {
        return Err(Error::Input("deficiency basis has the wrong shape".into()));
    }
    let q = orthonormal_columns(basis, 1e-12);
    if q.ncols() != basis.ncols() {
        return Err(Error::Input("deficiency basis is linearly dependent".into()));
    }
    if 2 * q.ncols() > n {
        log::warn!("deficiency dimension {} exceeds half of {}", q.ncols(), n);
    }
    let a_mi = &a.a - eye(n) * C64::new(0.0, 1.0);
    let inv = crate::linalg::inverse(&a_mi).ok_or_else(|| Error::Input("A - i is singular".into()))?;
    let w_minus = -(&inv * &q);
    let w_plus = &a.a * &inv * &q;
    let q_dual = (&a.a + eye(n) * C64::new(0.0, 1.0)) * &inv * &q;
    let outside = (eye(n) - &q * q.adjoint()) * &q_dual;
    let overlap = singular_values(&outside).last().copied().unwrap_or(0.0);
    let overlap = if q.ncols() > outside.nrows() - q.ncols() { 0.0 } else { overlap };
    Ok(DeficiencySetup { a: a.a.clone(), q, q_dual, w_plus, w_minus, overlap })
}

/// `⟨ξ₊^u, ξ₋^v⟩ - ⟨ξ₋^u, ξ₊^v⟩`.
pub fn boundary_form(xp_u: &CVec, xm_u: &CVec, xp_v: &CVec, xm_v: &CVec) -> C64 {
    xp_u.dotc(xm_v) - xm_u.dotc(xp_v)
}

/// A vector of the defect together with the action of the formal adjoint.
#[derive(Clone, Debug)]
pub struct DefectElement {
    pub u: CVec,
    pub adjoint_u: CVec,
}

impl DeficiencySetup {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn d(&self) -> usize {
        self.q.ncols()
    }

    fn shifted_inverse(&self, z: C64) -> Result<CMat> {
        let n = self.dim();
        let m = &self.a - eye(n) * z;
        let s = singular_values(&m);
        if s.last().copied().unwrap_or(1.0) <= 1e-14 * s.first().copied().unwrap_or(1.0).max(1.0) {
            return Err(Error::Pole { lambda: z.re, index: 0 });
        }
        crate::linalg::inverse(&m).ok_or(Error::Pole { lambda: z.re, index: 0 })
    }

    /// `u = u₀ + A(A-i)^{-1}ξ₊ - (A-i)^{-1}ξ₋` with `u₀ = (A-i)^{-1}w`,
    /// `w ⊥ N_i`, and `A₀⁺u = Au₀ - (A-i)^{-1}ξ₊ - A(A-i)^{-1}ξ₋`.
    pub fn element(&self, w: &CVec, xp: &CVec, xm: &CVec) -> Result<DefectElement> {
        let n = self.dim();
        let w = w - &self.q * (self.q.adjoint() * w);
        let inv = self.shifted_inverse(C64::new(0.0, 1.0))?;
        let u0 = &inv * w;
        let u = &u0 + &self.w_plus * xp + &self.w_minus * xm;
        let adjoint_u = &self.a * &u0 + &self.w_minus * xp - &self.w_plus * xm;
        debug_assert_eq!(u.len(), n);
        Ok(DefectElement { u, adjoint_u })
    }

    /// `𝓜(λ) = Q†[A - (I + A²)(A - λ)^{-1}]Q`.
    pub fn weyl(&self, z: C64) -> Result<CMat> {
        let n = self.dim();
        let inv = self.shifted_inverse(z)?;
        let inner = &self.a - (eye(n) + &self.a * &self.a) * inv;
        Ok(self.q.adjoint() * inner * &self.q)
    }

    /// `-Q†(I + λA)(A - λ)^{-1}Q`.
    pub fn weyl_alt(&self, z: C64) -> Result<CMat> {
        Ok(-self.q.adjoint() * self.g(z)? * &self.q)
    }

    fn g(&self, z: C64) -> Result<CMat> {
        let n = self.dim();
        Ok((eye(n) + &self.a * z) * self.shifted_inverse(z)?)
    }

    /// Matrix of `(A_M - λ)^{-1}` from the Krein formula.
    pub fn krein_resolvent(&self, m: &CMat, z: C64) -> Result<CMat> {
        let n = self.dim();
        let inv = self.shifted_inverse(z)?;
        let gq = self.q.adjoint() * self.g(z)? * &self.q;
        let bracket = eye(self.d()) + gq * m;
        let sb = singular_values(&bracket);
        if sb.last().copied().unwrap_or(1.0) <= 1e-13 * sb.first().copied().unwrap_or(1.0).max(1.0) {
            return Err(Error::ExtensionEigenvalue(z.re));
        }
        let right = self.q.adjoint() * (&self.a - eye(n) * C64::new(0.0, 1.0)) * &inv;
        let mid = solve(&bracket, &right).ok_or(Error::ExtensionEigenvalue(z.re))?;
        let left = (&self.a + eye(n) * C64::new(0.0, 1.0)) * &inv * &self.q * m;
        Ok(&inv - left * mid)
    }

    /// Solution of `(A₀⁺ - λ)u = f` on the plane `ξ₊ = Mξ₋`, returned with
    /// its symplectic coordinates and the formal action.
    pub fn resolvent_solution(&self, m: &CMat, z: C64, f: &CVec) -> Result<(DefectElement, CVec, CVec)> {
        let n = self.dim();
        let inv = self.shifted_inverse(z)?;
        let gq = self.q.adjoint() * self.g(z)? * &self.q;
        let bracket = eye(self.d()) + &gq * m;
        let h = self.q.adjoint() * (&self.a - eye(n) * C64::new(0.0, 1.0)) * (&inv * f);
        let hm = CMat::from_column_slice(h.len(), 1, h.as_slice());
        let xm: CVec = -solve(&bracket, &hm).ok_or(Error::ExtensionEigenvalue(z.re))?.column(0).into_owned();
        let xp: CVec = m * &xm;
        let ami = &self.a - eye(n) * C64::new(0.0, 1.0);
        let w = self.g(z)? * (&self.q * &xp) + &self.q * &xm + &ami * (&inv * f);
        Ok((self.element(&w, &xp, &xm)?, xp, xm))
    }

    /// The extension `A_M` assembled directly from its domain.
    pub fn direct_extension(&self, m: &CMat) -> Result<CMat> {
        let n = self.dim();
        let d = self.d();
        let inv = self.shifted_inverse(C64::new(0.0, 1.0))?;
        let perp = orthonormal_columns(&(eye(n) - &self.q * self.q.adjoint()), 1e-12);
        let mut dom = CMat::zeros(n, n);
        let mut img = CMat::zeros(n, n);
        let d0 = &inv * &perp;
        dom.columns_mut(0, n - d).copy_from(&d0);
        img.columns_mut(0, n - d).copy_from(&(&self.a * &d0));
        let qm = &self.q * m;
        let ai = &self.a * &inv;
        dom.columns_mut(n - d, d).copy_from(&(&ai * &qm - &inv * &self.q));
        img.columns_mut(n - d, d).copy_from(&(-(&inv * &qm) - &ai * &self.q));
        let dom_inv = crate::linalg::inverse(&dom).ok_or(Error::Overlap(0.0))?;
        Ok(img * dom_inv)
    }

    /// `det(A - λ) det(I + G(λ)M)` on the real axis.
    fn bracket_det(&self, m: &CMat, lambda: f64) -> f64 {
        let n = self.dim();
        let z = c(lambda);
        let base = det(&(&self.a - eye(n) * z));
        match self.g(z) {
            Ok(g) => (base * det(&(eye(self.d()) + self.q.adjoint() * g * &self.q * m))).re,
            Err(_) => f64::NAN,
        }
    }

    /// Real eigenvalues of `A_M` from the sign changes of the Krein bracket.
    pub fn extension_eigenvalues(&self, m: &CMat) -> Result<Vec<f64>> {
        let am = self.direct_extension(m)?;
        let bound = singular_values(&am).first().copied().unwrap_or(1.0) + 1.0;
        let steps = 20_000;
        let grid = crate::linalg::linspace(-bound, bound, steps);
        let vals: Vec<f64> = grid.iter().map(|&l| self.bracket_det(m, l)).collect();
        let mut out = Vec::new();
        for i in 0..steps - 1 {
            let (fa, fb) = (vals[i], vals[i + 1]);
            if !(fa.is_finite() && fb.is_finite()) {
                continue;
            }
            if fa == 0.0 {
                out.push(grid[i]);
                continue;
            }
            if fa * fb < 0.0 {
                let (mut a, mut b, mut f0) = (grid[i], grid[i + 1], fa);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    let fm = self.bracket_det(m, mid);
                    if !fm.is_finite() || fm == 0.0 || b - a < 1e-14 * bound {
                        a = mid;
                        b = mid;
                        break;
                    }
                    if f0 * fm < 0.0 {
                        b = mid;
                    } else {
                        a = mid;
                        f0 = fm;
                    }
                }
                out.push(0.5 * (a + b));
            }
        }
        Ok(out)
    }

    /// `-iε R(λ₀ + iε)`, which tends to the spectral projection at `λ₀`.
    pub fn residue_projection(&self, m: &CMat, lambda: f64, eps: f64) -> Result<CMat> {
        let r = self.krein_resolvent(m, C64::new(lambda, eps))?;
        Ok(r * C64::new(0.0, -eps))
    }
}

/// Eigenvalues of the Hermitian part of `(X - X†)/2i`.
pub fn imaginary_part_eigenvalues(x: &CMat) -> Vec<f64> {
    let im = (x - x.adjoint()) * C64::new(0.0, -0.5);
    crate::linalg::hermitian_eigen(&im).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frob;

    fn setup_two() -> DeficiencySetup {
        let a = InnerHamiltonian::diagonal(&[1.0, 2.0]);
        let v = CMat::from_column_slice(2, 1, &[c(1.0), c(1.0)]);
        make_setup(&a, &v).unwrap()
    }

    #[test]
    fn eigenvector_span_overlaps() {
        let a = InnerHamiltonian::diagonal(&[1.0, 2.0, 3.0]);
        let v = CMat::from_column_slice(3, 1, &[c(0.0), c(1.0), c(0.0)]);
        assert!(matches!(make_setup(&a, &v), Err(Error::Overlap(_))));
    }

    #[test]
    fn two_level_setup_is_valid() {
        let s = setup_two();
        assert_eq!(s.d(), 1);
        assert!(s.overlap > 0.1);
    }

    #[test]
    fn scalar_weyl_function() {
        let a = InnerHamiltonian::diagonal(&[2.5]);
        let s = DeficiencySetup {
            a: a.a.clone(),
            q: eye(1),
            q_dual: eye(1),
            w_plus: eye(1),
            w_minus: eye(1),
            overlap: 1.0,
        };
        let l = c(0.7);
        let w = s.weyl(l).unwrap()[(0, 0)];
        let want = -(c(1.0) + l * 2.5) / (c(2.5) - l);
        assert!((w - want).norm() < 1e-14);
    }

    #[test]
    fn weyl_forms_agree_and_are_herglotz() {
        let s = setup_two();
        for &x in &[-1.0, 0.3, 1.5, 4.0] {
            let z = C64::new(x, 0.2);
            assert!(frob(&(s.weyl(z).unwrap() - s.weyl_alt(z).unwrap())) < 1e-13);
            assert!(imaginary_part_eigenvalues(&s.weyl(z).unwrap()).iter().all(|&v| v < 0.0));
        }
    }

    #[test]
    fn krein_matches_direct_extension() {
        let s = setup_two();
        let m = CMat::from_element(1, 1, c(0.8));
        let am = s.direct_extension(&m).unwrap();
        let z = C64::new(0.4, 0.3);
        let direct = crate::linalg::inverse(&(&am - eye(2) * z)).unwrap();
        assert!(frob(&(direct - s.krein_resolvent(&m, z).unwrap())) < 1e-12);
        let ev = s.extension_eigenvalues(&m).unwrap();
        let want = crate::linalg::hermitian_eigen(&am).0;
        assert_eq!(ev.len(), want.len());
        for (a, b) in ev.iter().zip(&want) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_parameter_gives_plain_resolvent_and_spectrum() {
        let s = setup_two();
        let m = CMat::zeros(1, 1);
        let z = C64::new(0.4, 0.3);
        let plain = crate::linalg::inverse(&(&s.a - eye(2) * z)).unwrap();
        assert!(frob(&(plain - s.krein_resolvent(&m, z).unwrap())) < 1e-14);
        let ev = s.extension_eigenvalues(&m).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-9 && (ev[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn boundary_form_matches_formal_adjoint() {
        let a = InnerHamiltonian::diagonal(&[0.5, 1.5, 2.0, 3.5, 4.0]);
        let basis = CMat::from_column_slice(5, 2, &[c(1.0), c(1.0), c(0.0), c(1.0), c(0.5), c(0.0), c(1.0), c(1.0), c(-1.0), c(2.0)]);
        let s = make_setup(&a, &basis).unwrap();
        let v = |x: [f64; 4]| CVec::from_column_slice(&[C64::new(x[0], x[1]), C64::new(x[2], x[3])]);
        let w = |x: f64| CVec::from_fn(5, |i, _| C64::new(x * i as f64, 1.0 - x));
        let (xpu, xmu, xpv, xmv) = (v([0.3, -1.0, 0.2, 0.7]), v([1.1, 0.4, -0.5, 0.0]), v([0.0, 0.9, 1.3, -0.2]), v([-0.6, 0.1, 0.8, 0.5]));
        let u = s.element(&w(0.3), &xpu, &xmu).unwrap();
        let vv = s.element(&w(-0.8), &xpv, &xmv).unwrap();
        let direct = vv.u.dotc(&u.adjoint_u) - vv.adjoint_u.dotc(&u.u);
        let lhs = u.adjoint_u.dotc(&vv.u) - u.u.dotc(&vv.adjoint_u);
        assert!((direct.conj() - lhs).norm() < 1e-14);
        assert!((lhs - boundary_form(&xpu, &xmu, &xpv, &xmv)).norm() < 1e-12);
    }

    #[test]
    fn resolvent_solution_lies_on_the_plane() {
        let s = setup_two();
        let m = CMat::from_element(1, 1, c(-0.6));
        let z = C64::new(1.3, 0.1);
        let f = CVec::from_column_slice(&[c(0.2), C64::new(-0.4, 0.1)]);
        let (el, xp, xm) = s.resolvent_solution(&m, z, &f).unwrap();
        assert!((&xp - &m * &xm).norm() < 1e-15);
        assert!((&el.adjoint_u - &el.u * z - &f).norm() < 1e-12);
        assert!((&el.u - s.krein_resolvent(&m, z).unwrap() * &f).norm() < 1e-12);
    }
}
