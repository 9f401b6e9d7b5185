//! Closed-form empirical velocity-porosity transforms.
//!
//! Two families live here:
//!
//! * the three-branch Raymer-Hunt-Gardner (RHG) relation, with a stiff-frame
//!   branch below 37% porosity, a Wood-style suspension branch above 47%, and
//!   a harmonic blend in between. RHG quantities are in m/s and g/cm³.
//! * seven lithology-specific linear (quadratic for chalk) laws relating
//!   porosity, P/S velocity and density, each with the input/output box it
//!   was regressed on. Lithology velocities are in km/s.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower end of the porosity blend window.
pub const RHG_BLEND_LO: f64 = 0.37;
/// Upper end of the porosity blend window.
pub const RHG_BLEND_HI: f64 = 0.47;

fn check_fraction(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            domain: "[0, 1]",
        })
    }
}

/// End-member properties for the RHG transform.
///
/// Velocities in m/s, densities in g/cm³. `v_h`/`rho_h` describe the solid
/// hydrate phase used by [`rhg_hydrate_vp`] and [`bulk_density`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhgParams {
    pub v_ma: f64,
    pub v_f: f64,
    pub rho_ma: f64,
    pub rho_f: f64,
    pub v_h: f64,
    pub rho_h: f64,
}

impl RhgParams {
    pub fn new(v_ma: f64, v_f: f64, rho_ma: f64, rho_f: f64, v_h: f64, rho_h: f64) -> Result<Self> {
        let p = RhgParams {
            v_ma,
            v_f,
            rho_ma,
            rho_f,
            v_h,
            rho_h,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("v_ma", self.v_ma),
            ("v_f", self.v_f),
            ("rho_ma", self.rho_ma),
            ("rho_f", self.rho_f),
            ("v_h", self.v_h),
            ("rho_h", self.rho_h),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "RHG parameter {name} must be finite and positive, got {v}"
                )));
            }
        }
        if self.v_ma <= self.v_f {
            return Err(Error::InvalidArgument(format!(
                "matrix velocity {} must exceed fluid velocity {}",
                self.v_ma, self.v_f
            )));
        }
        Ok(())
    }
}

/// Stiff-frame branch: `(1-φ)²·v_ma + φ·v_f`.
pub fn rhg_vp1(phi: f64, p: &RhgParams) -> Result<f64> {
    check_fraction("phi", phi)?;
    let solid = 1.0 - phi;
    Ok(solid * solid * p.v_ma + phi * p.v_f)
}

/// Mass-balance bulk density of a matrix + hydrate + fluid mixture.
pub fn bulk_density(phi: f64, s_h: f64, p: &RhgParams) -> Result<f64> {
    check_fraction("phi", phi)?;
    check_fraction("s_h", s_h)?;
    Ok((1.0 - phi) * p.rho_ma + phi * s_h * p.rho_h + phi * (1.0 - s_h) * p.rho_f)
}

/// Suspension branch: solves `1/(ρV²) = φ/(ρ_f V_f²) + (1-φ)/(ρ_ma V_ma²)`
/// with ρ the fluid-saturated bulk density.
pub fn rhg_vp2(phi: f64, p: &RhgParams) -> Result<f64> {
    check_fraction("phi", phi)?;
    // Pure end-members, returned exactly.
    if phi == 0.0 {
        return Ok(p.v_ma);
    }
    if phi == 1.0 {
        return Ok(p.v_f);
    }
    let rho = bulk_density(phi, 0.0, p)?;
    let compliance = phi / (p.rho_f * p.v_f * p.v_f) + (1.0 - phi) / (p.rho_ma * p.v_ma * p.v_ma);
    Ok((1.0 / (rho * compliance)).sqrt())
}

/// Full piecewise RHG P-velocity.
pub fn rhg_vp(phi: f64, p: &RhgParams) -> Result<f64> {
    check_fraction("phi", phi)?;
    if phi < RHG_BLEND_LO {
        return rhg_vp1(phi, p);
    }
    if phi > RHG_BLEND_HI {
        return rhg_vp2(phi, p);
    }
    let w2 = (phi - RHG_BLEND_LO) / (RHG_BLEND_HI - RHG_BLEND_LO);
    let w1 = (RHG_BLEND_HI - phi) / (RHG_BLEND_HI - RHG_BLEND_LO);
    if w2 == 0.0 {
        return rhg_vp1(phi, p);
    }
    if w1 == 0.0 {
        return rhg_vp2(phi, p);
    }
    let v1 = rhg_vp1(phi, p)?;
    let v2 = rhg_vp2(phi, p)?;
    Ok(1.0 / (w2 / v2 + w1 / v1))
}

/// RHG velocity for hydrate-bearing sediment.
///
/// Hydrate is treated as part of the load-bearing frame: pore space shrinks to
/// `φ(1-s_h)` and the matrix velocity becomes the volume average of mineral
/// and hydrate over the enlarged frame.
pub fn rhg_hydrate_vp(phi: f64, s_h: f64, p: &RhgParams) -> Result<f64> {
    check_fraction("phi", phi)?;
    check_fraction("s_h", s_h)?;
    if s_h == 0.0 {
        return rhg_vp(phi, p);
    }
    let phi_eff = phi * (1.0 - s_h);
    if phi_eff >= 1.0 {
        return Err(Error::Domain {
            name: "phi*(1-s_h)",
            value: phi_eff,
            domain: "[0, 1)",
        });
    }
    let frame = 1.0 - phi_eff;
    let v_frame = (p.v_ma * (1.0 - phi) + p.v_h * phi * s_h) / frame;
    let mixed = RhgParams { v_ma: v_frame, ..*p };
    rhg_vp(phi_eff, &mixed)
}

/// The seven lithologies with published velocity-porosity laws, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Lithology {
    Chalks,
    Dolomite,
    Sandstones,
    TightGasSandstones,
    Limestone,
    HighPorositySandstones,
    PoorlyConsolidatedSandstones,
}

impl Lithology {
    pub const ALL: [Lithology; 7] = [
        Lithology::Chalks,
        Lithology::Dolomite,
        Lithology::Sandstones,
        Lithology::TightGasSandstones,
        Lithology::Limestone,
        Lithology::HighPorositySandstones,
        Lithology::PoorlyConsolidatedSandstones,
    ];

    /// Stable snake_case token used in CSV files.
    pub fn token(self) -> &'static str {
        match self {
            Lithology::Chalks => "chalks",
            Lithology::Dolomite => "dolomite",
            Lithology::Sandstones => "sandstones",
            Lithology::TightGasSandstones => "tight_gas_sandstones",
            Lithology::Limestone => "limestone",
            Lithology::HighPorositySandstones => "high_porosity_sandstones",
            Lithology::PoorlyConsolidatedSandstones => "poorly_consolidated_sandstones",
        }
    }
}

impl fmt::Display for Lithology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Lithology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Lithology::ALL
            .into_iter()
            .find(|l| l.token() == s)
            .ok_or_else(|| Error::parse(format!("unknown lithology `{s}`")))
    }
}

/// Polynomial of degree 1 or 2, coefficients highest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyLaw {
    coefficients: Vec<f64>,
}

impl PolyLaw {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if !(2..=3).contains(&coefficients.len()) {
            return Err(Error::InvalidArgument(format!(
                "polynomial law needs 2 or 3 coefficients, got {}",
                coefficients.len()
            )));
        }
        if coefficients[0] == 0.0 {
            return Err(Error::InvalidArgument(
                "leading coefficient must be nonzero".into(),
            ));
        }
        Ok(PolyLaw { coefficients })
    }

    pub fn affine(slope: f64, intercept: f64) -> Self {
        PolyLaw {
            coefficients: vec![slope, intercept],
        }
    }

    pub fn quadratic(a: f64, b: f64, c: f64) -> Self {
        PolyLaw {
            coefficients: vec![a, b, c],
        }
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().fold(0.0, |acc, &c| acc * x + c)
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Range { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Range grown by `rel` of each bound's magnitude.
    pub fn widened(&self, rel: f64) -> Range {
        Range {
            lo: self.lo - rel * self.lo.abs(),
            hi: self.hi + rel * self.hi.abs(),
        }
    }
}

/// Published applicability envelope of one lithology law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityBox {
    pub phi: Range,
    pub rho: Range,
    pub vp: Range,
    pub vs: Range,
}

/// How the dolomite density law is read.
///
/// The tabulated dolomite law has a negative slope, which puts its densities
/// (≈0.88–1.38 g/cm³) far below the dolomite density range. `DolomiteSignCorrected`
/// flips the slope sign; every other lithology is identical in both modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RhoLawMode {
    AsPrinted,
    #[default]
    DolomiteSignCorrected,
}

impl RhoLawMode {
    pub fn token(self) -> &'static str {
        match self {
            RhoLawMode::AsPrinted => "printed",
            RhoLawMode::DolomiteSignCorrected => "corrected",
        }
    }
}

impl FromStr for RhoLawMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" | "as_printed" => Ok(RhoLawMode::AsPrinted),
            "corrected" | "dolomite_sign_corrected" => Ok(RhoLawMode::DolomiteSignCorrected),
            other => Err(Error::InvalidArgument(format!(
                "unknown density-law mode `{other}` (expected `printed` or `corrected`)"
            ))),
        }
    }
}

impl fmt::Display for RhoLawMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LithologyTransform {
    pub lith: Lithology,
    /// φ → Vp (km/s).
    pub vp_law: PolyLaw,
    /// φ → Vs (km/s).
    pub vs_law: PolyLaw,
    /// Vp (km/s) → ρ (g/cm³).
    pub rho_law: PolyLaw,
    pub validity: ValidityBox,
    pub rho_law_mode: RhoLawMode,
}

impl LithologyTransform {
    /// Built-in law for `lith`, with the density law read according to `mode`.
    pub fn builtin(lith: Lithology, mode: RhoLawMode) -> Self {
        use Lithology::*;
        let (vp_law, vs_law, rho_law) = match lith {
            Chalks => (
                PolyLaw::quadratic(5.059, -8.505, 5.128),
                PolyLaw::affine(-2.933, 2.766),
                PolyLaw::affine(0.373, 1.045),
            ),
            Dolomite => (
                PolyLaw::affine(-9.380, 6.606),
                PolyLaw::affine(-4.719, 3.581),
                PolyLaw::affine(-0.137, 1.843),
            ),
            Sandstones => (
                PolyLaw::affine(-5.201, 4.944),
                PolyLaw::affine(-3.484, 2.981),
                PolyLaw::affine(0.195, 1.569),
            ),
            TightGasSandstones => (
                PolyLaw::affine(-3.836, 4.868),
                PolyLaw::affine(-1.703, 3.149),
                PolyLaw::affine(0.117, 1.96),
            ),
            Limestone => (
                PolyLaw::affine(-6.65, 5.624),
                PolyLaw::affine(-3.866, 3.053),
                PolyLaw::affine(0.202, 1.513),
            ),
            HighPorositySandstones => (
                PolyLaw::affine(-2.227, 4.303),
                PolyLaw::affine(-1.626, 2.486),
                PolyLaw::affine(0.219, 1.450),
            ),
            PoorlyConsolidatedSandstones => (
                PolyLaw::affine(-3.414, 3.774),
                PolyLaw::affine(-2.424, 2.100),
                PolyLaw::affine(0.224, 1.498),
            ),
        };
        let rho_law = if lith == Dolomite && mode == RhoLawMode::DolomiteSignCorrected {
            PolyLaw::affine(0.137, 1.843)
        } else {
            rho_law
        };
        LithologyTransform {
            lith,
            vp_law,
            vs_law,
            rho_law,
            validity: validity_box(lith),
            rho_law_mode: mode,
        }
    }

    /// All seven transforms in table order.
    pub fn table(mode: RhoLawMode) -> Vec<LithologyTransform> {
        Lithology::ALL
            .into_iter()
            .map(|l| LithologyTransform::builtin(l, mode))
            .collect()
    }
}

// 3.14 km/s is a tabulated velocity bound, not π.
#[allow(clippy::approx_constant)]
fn validity_box(lith: Lithology) -> ValidityBox {
    use Lithology::*;
    let r = Range::new;
    let (phi, rho, vp, vs) = match lith {
        Chalks => (r(0.10, 0.75), r(1.43, 2.57), r(1.53, 4.30), r(1.59, 2.51)),
        Dolomite => (r(0.00, 0.32), r(2.27, 2.84), r(3.41, 7.02), r(2.01, 3.64)),
        Sandstones => (r(0.04, 0.30), r(2.09, 2.64), r(3.13, 5.52), r(1.73, 3.60)),
        TightGasSandstones => (r(0.01, 0.14), r(2.26, 2.67), r(3.81, 5.57), r(2.59, 3.50)),
        Limestone => (r(0.03, 0.41), r(2.00, 2.65), r(3.39, 5.79), r(1.67, 3.04)),
        HighPorositySandstones => (r(0.02, 0.32), r(2.12, 2.69), r(3.46, 4.79), r(1.95, 2.66)),
        PoorlyConsolidatedSandstones => {
            (r(0.22, 0.36), r(2.01, 2.23), r(2.43, 3.14), r(1.21, 1.66))
        }
    };
    ValidityBox { phi, rho, vp, vs }
}

pub fn lith_vp(t: &LithologyTransform, phi: f64) -> Result<f64> {
    check_fraction("phi", phi)?;
    Ok(t.vp_law.eval(phi))
}

pub fn lith_vs(t: &LithologyTransform, phi: f64) -> Result<f64> {
    check_fraction("phi", phi)?;
    Ok(t.vs_law.eval(phi))
}

pub fn lith_rho(t: &LithologyTransform, vp: f64) -> Result<f64> {
    if !(vp > 0.0) {
        return Err(Error::Domain {
            name: "vp",
            value: vp,
            domain: "(0, inf)",
        });
    }
    Ok(t.rho_law.eval(vp))
}

/// Whether `phi` lies inside the published porosity range (inclusive).
pub fn in_validity(t: &LithologyTransform, phi: f64) -> bool {
    t.validity.phi.contains(phi)
}

/// Coefficient audit table: `lithology,law,degree,c2,c1,c0`.
///
/// Affine laws leave `c2` empty.
pub fn coefficient_table_csv(mode: RhoLawMode) -> String {
    let mut out = String::from("lithology,law,degree,c2,c1,c0\n");
    for t in LithologyTransform::table(mode) {
        for (name, law) in [("phi_vp", &t.vp_law), ("phi_vs", &t.vs_law), ("vp_rho", &t.rho_law)] {
            let c = law.coefficients();
            let (c2, c1, c0) = match c.len() {
                3 => (format!("{:?}", c[0]), c[1], c[2]),
                _ => (String::new(), c[0], c[1]),
            };
            out.push_str(&format!(
                "{},{},{},{},{:?},{:?}\n",
                t.lith,
                name,
                law.degree(),
                c2,
                c1,
                c0
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> RhgParams {
        RhgParams::new(5000.0, 1500.0, 2.65, 1.03, 3350.0, 0.92).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn vp1_limits_and_midpoint() {
        let p = params();
        assert_eq!(rhg_vp1(0.0, &p).unwrap(), 5000.0);
        assert_eq!(rhg_vp1(1.0, &p).unwrap(), 1500.0);
        assert!(close(rhg_vp1(0.2, &p).unwrap(), 3500.0, 1e-12));
        assert!(matches!(rhg_vp1(1.2, &p), Err(Error::Domain { .. })));
        assert!(rhg_vp1(-0.01, &p).is_err());
    }

    #[test]
    fn bulk_density_mixtures() {
        let p = params();
        assert_eq!(bulk_density(0.0, 0.0, &p).unwrap(), 2.65);
        assert_eq!(bulk_density(1.0, 0.0, &p).unwrap(), 1.03);
        assert!(close(bulk_density(0.6, 0.0, &p).unwrap(), 1.678, 1e-12));
        assert!(bulk_density(0.5, 1.5, &p).is_err());
    }

    #[test]
    fn vp2_limits_and_value() {
        let p = params();
        assert_eq!(rhg_vp2(1.0, &p).unwrap(), 1500.0);
        assert_eq!(rhg_vp2(0.0, &p).unwrap(), 5000.0);
        let v = rhg_vp2(0.6, &p).unwrap();
        assert!((v - 1499.8).abs() < 0.05, "{v}");
    }

    #[test]
    fn piecewise_dispatch() {
        let p = params();
        assert_eq!(rhg_vp(0.37, &p).unwrap(), rhg_vp1(0.37, &p).unwrap());
        assert_eq!(rhg_vp(0.47, &p).unwrap(), rhg_vp2(0.47, &p).unwrap());
        let v1 = rhg_vp1(0.42, &p).unwrap();
        let v2 = rhg_vp2(0.42, &p).unwrap();
        let harmonic = 2.0 / (1.0 / v1 + 1.0 / v2);
        assert!(close(rhg_vp(0.42, &p).unwrap(), harmonic, 1e-12));
        assert_eq!(rhg_vp(0.2, &p).unwrap(), rhg_vp1(0.2, &p).unwrap());
        assert_eq!(rhg_vp(0.8, &p).unwrap(), rhg_vp2(0.8, &p).unwrap());
    }

    #[test]
    fn hydrate_composition() {
        let p = params();
        for phi in [0.1, 0.4, 0.45, 0.9, 1.0] {
            assert_eq!(rhg_hydrate_vp(phi, 0.0, &p).unwrap(), rhg_vp(phi, &p).unwrap());
        }
        let full = rhg_hydrate_vp(0.4, 1.0, &p).unwrap();
        assert!(close(full, 0.6 * 5000.0 + 0.4 * 3350.0, 1e-12));
        // φ_eff = 0.3, frame velocity = (2500 + 670)/0.7, stiff branch.
        let v = rhg_hydrate_vp(0.5, 0.4, &p).unwrap();
        assert!(close(v, 2669.0, 1e-12), "{v}");
        assert!(rhg_hydrate_vp(0.5, -0.1, &p).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(RhgParams::new(1500.0, 5000.0, 2.65, 1.03, 3350.0, 0.92).is_err());
        assert!(RhgParams::new(5000.0, 1500.0, 0.0, 1.03, 3350.0, 0.92).is_err());
        assert!(RhgParams::new(5000.0, 1500.0, 2.65, f64::NAN, 3350.0, 0.92).is_err());
    }

    #[test]
    fn lithology_laws() {
        let m = RhoLawMode::DolomiteSignCorrected;
        let t = |l| LithologyTransform::builtin(l, m);
        assert_eq!(lith_vp(&t(Lithology::Dolomite), 0.0).unwrap(), 6.606);
        assert!(close(lith_vp(&t(Lithology::Chalks), 0.10).unwrap(), 4.32809, 1e-12));
        assert!(close(lith_vp(&t(Lithology::Sandstones), 0.30).unwrap(), 3.3837, 1e-12));
        assert_eq!(lith_vs(&t(Lithology::Chalks), 0.0).unwrap(), 2.766);
        assert!(close(
            lith_vs(&t(Lithology::PoorlyConsolidatedSandstones), 0.36).unwrap(),
            1.22736,
            1e-12
        ));
        assert_eq!(lith_vs(&t(Lithology::Limestone), 0.0).unwrap(), 3.053);
        assert!(close(lith_rho(&t(Lithology::Chalks), 4.30).unwrap(), 2.6489, 1e-12));
        assert!(lith_vp(&t(Lithology::Chalks), 1.5).is_err());
        assert!(lith_rho(&t(Lithology::Chalks), 0.0).is_err());
    }

    #[test]
    fn dolomite_density_modes() {
        let printed = LithologyTransform::builtin(Lithology::Dolomite, RhoLawMode::AsPrinted);
        let fixed =
            LithologyTransform::builtin(Lithology::Dolomite, RhoLawMode::DolomiteSignCorrected);
        assert!(close(lith_rho(&printed, 3.41).unwrap(), 1.37583, 1e-12));
        assert!(close(lith_rho(&fixed, 3.41).unwrap(), 2.31017, 1e-12));
        for l in Lithology::ALL.into_iter().filter(|&l| l != Lithology::Dolomite) {
            assert_eq!(
                LithologyTransform::builtin(l, RhoLawMode::AsPrinted).rho_law,
                LithologyTransform::builtin(l, RhoLawMode::DolomiteSignCorrected).rho_law
            );
        }
    }

    #[test]
    fn law_shapes() {
        for t in LithologyTransform::table(RhoLawMode::AsPrinted) {
            let expect = if t.lith == Lithology::Chalks { 2 } else { 1 };
            assert_eq!(t.vp_law.degree(), expect);
            assert_eq!(t.vs_law.degree(), 1);
            assert_eq!(t.rho_law.degree(), 1);
            let v = t.validity;
            for r in [v.phi, v.rho, v.vp, v.vs] {
                assert!(r.lo < r.hi);
            }
            assert!(v.phi.lo >= 0.0 && v.phi.hi <= 1.0);
        }
    }

    #[test]
    fn validity_membership() {
        let m = RhoLawMode::default();
        let tight = LithologyTransform::builtin(Lithology::TightGasSandstones, m);
        assert!(in_validity(&tight, 0.01));
        assert!(!in_validity(&tight, 0.20));
        assert!(in_validity(&LithologyTransform::builtin(Lithology::Chalks, m), 0.75));
    }

    #[test]
    fn poly_law_rejects_bad_shapes() {
        assert!(PolyLaw::new(vec![1.0]).is_err());
        assert!(PolyLaw::new(vec![0.0, 1.0]).is_err());
        assert!(PolyLaw::new(vec![1.0, 2.0, 3.0, 4.0]).is_err());
        assert_eq!(PolyLaw::new(vec![2.0, 1.0]).unwrap().eval(3.0), 7.0);
    }

    #[test]
    fn lithology_tokens_round_trip() {
        for l in Lithology::ALL {
            assert_eq!(l.token().parse::<Lithology>().unwrap(), l);
        }
        assert!("basalt".parse::<Lithology>().is_err());
    }
}
