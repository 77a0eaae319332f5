//! The two square T-junctions used throughout the examples and tests, and a
//! small analytic model of the asymmetric one built from its printed data.

use std::f64::consts::PI;

use crate::error::Result;
use crate::geometry::{build_junction, Junction, JunctionSpec, LeadSpec, Side, WellSpec};
use crate::spectral::{import_eigendata, sine_overlap, EigenData, EigenRecord};

/// `2∫_0^{π/4} sin 2x sin 4x dx`.
pub const ALPHA: f64 = 2.0 / 3.0;
/// `∫_0^{π/2} sin x sin 4x dx`.
pub const GAMMA: f64 = -4.0 / 15.0;
pub const BETA: f64 = ALPHA + GAMMA;

/// Open-channel current of `φ_{1,2}` on the three leads, as printed.
pub fn psi12_printed() -> [f64; 3] {
    [0.0, 16.0 * 2f64.sqrt() / (3.0 * PI * PI), -4.0 / PI]
}

/// Open-channel current of `φ_{2,1}` on the three leads, as printed.
pub fn psi21_printed() -> [f64; 3] {
    [16.0 / (3.0 * PI * PI), 0.0, -16.0 / (3.0 * PI * PI)]
}

/// `π × π` square, leads of width `π/2`: right lead centred, top lead
/// centred, left lead at the bottom corner.
pub fn example4_spec() -> JunctionSpec {
    let w = PI / 2.0;
    JunctionSpec {
        well: WellSpec { a: PI, b: PI, v: 0.0 },
        leads: vec![
            LeadSpec { side: Side::Right, offset: PI / 4.0, width: w },
            LeadSpec { side: Side::Top, offset: PI / 4.0, width: w },
            LeadSpec { side: Side::Left, offset: 0.0, width: w },
        ],
        v_lead: 0.0,
    }
}

pub fn example4_junction() -> Junction {
    build_junction(example4_spec()).expect("example geometry is valid")
}

/// Same square with a lead of width `width` centred on each of the right,
/// top and left sides.
pub fn symmetric_spec_with_width(width: f64) -> JunctionSpec {
    let off = 0.5 * (PI - width);
    JunctionSpec {
        well: WellSpec { a: PI, b: PI, v: 0.0 },
        leads: vec![
            LeadSpec { side: Side::Right, offset: off, width },
            LeadSpec { side: Side::Top, offset: off, width },
            LeadSpec { side: Side::Left, offset: off, width },
        ],
        v_lead: 0.0,
    }
}

pub fn symmetric_spec() -> JunctionSpec {
    symmetric_spec_with_width(PI / 2.0)
}

pub fn symmetric_junction() -> Junction {
    build_junction(symmetric_spec()).expect("example geometry is valid")
}

/// Asymmetric geometry with all lead widths set to `width`; lead offsets
/// keep the same relative placement.
pub fn example4_with_width(width: f64) -> Result<Junction> {
    let mut spec = example4_spec();
    for (i, lead) in spec.leads.iter_mut().enumerate() {
        lead.width = width;
        lead.offset = if i == 2 { 0.0 } else { 0.5 * (PI - width) };
    }
    build_junction(spec)
}

/// The three overlap integrals recomputed from the closed form.
pub fn overlap_constants() -> (f64, f64, f64) {
    let alpha = sine_overlap(2.0, PI / 4.0, 2, PI / 2.0);
    let gamma = sine_overlap(1.0, 0.0, 2, PI / 2.0);
    (alpha, gamma, alpha + gamma)
}

/// `δ^Q(λ) = π(α² + β²)/(4√(16 - λ))`.
pub fn delta_q(lambda: f64) -> f64 {
    PI * (ALPHA * ALPHA + BETA * BETA) / (4.0 * (16.0 - lambda).sqrt())
}

/// Fixed point of `λ = 5 - δ^Q(λ)`.
pub fn shifted_eigenvalue() -> f64 {
    let mut x = 5.0;
    for _ in 0..200 {
        let next = 5.0 - delta_q(x);
        if (next - x).abs() < 1e-15 {
            return next;
        }
        x = next;
    }
    x
}

/// Eigen-data reproducing the printed approximation: the double eigenvalue
/// 5 with the printed open currents and a single second-channel current on
/// the middle lead, plus the eigenvalue 8 seen only in the open channel of
/// the third lead.
pub fn example4_printed_data() -> EigenData {
    let s = PI.sqrt() / 2.0;
    let (p12, p21) = (psi12_printed(), psi21_printed());
    let rec = |open: [f64; 3], closed_mid: f64| EigenRecord {
        lambda: 5.0,
        currents: (0..3).map(|m| vec![s * open[m], if m == 1 { closed_mid } else { 0.0 }]).collect(),
    };
    let r8 = EigenRecord { lambda: 8.0, currents: vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![2.0, 0.0]] };
    import_eigendata(&[rec(p12, s * ALPHA), rec(p21, -s * BETA), r8]).expect("fixture is well formed")
}

/// Open-channel currents `(c_{1,3} + c_{3,1})` of the symmetric junction at
/// the eigenvalue 10, on the right, top and left leads.
pub fn symmetric_resonance_current(junction: &Junction) -> [f64; 3] {
    let data = EigenData::rectangle(junction, 10.5, 2);
    let mut v = [0.0; 3];
    for s in 0..data.len() {
        if matches!(data.labels[s], Some((1, 3)) | Some((3, 1))) {
            let open = data.currents.open(s);
            for m in 0..3 {
                v[m] += open[m];
            }
        }
    }
    v
}

/// Signed ratio of the middle-lead coefficient to the side-lead coefficient
/// of the symmetric resonance current.
pub fn symmetric_gamma(junction: &Junction) -> f64 {
    let v = symmetric_resonance_current(junction);
    v[1] / v[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_constants() {
        let (a, g, b) = overlap_constants();
        assert!((a - ALPHA).abs() < 1e-14);
        assert!((g - GAMMA).abs() < 1e-14);
        assert!((b - 0.4).abs() < 1e-14);
    }

    #[test]
    fn shifted_eigenvalue_is_a_fixed_point() {
        let l = shifted_eigenvalue();
        assert!((l - (5.0 - delta_q(l))).abs() < 1e-14);
        assert!((l - 4.857).abs() < 1e-3);
    }

    #[test]
    fn geometries_are_valid() {
        assert_eq!(example4_junction().n_leads(), 3);
        assert_eq!(symmetric_junction().n_leads(), 3);
        assert!(example4_with_width(1.0).is_ok());
    }

    #[test]
    fn symmetric_current_is_mirror_symmetric() {
        let v = symmetric_resonance_current(&symmetric_junction());
        assert!((v[0] - v[2]).abs() < 1e-12);
    }
}
