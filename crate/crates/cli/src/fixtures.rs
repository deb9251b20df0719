//! Built-in fixtures, addressable by name from `--fixture`.

use alglab_core::algebroid::ChartedAlgebroid;
use alglab_core::groupoid::WeinsteinModel;
use alglab_core::jacobi::ContactChart;
use alglab_core::monodromy::SphereFamily;
use serde::Deserialize;

use crate::InputError;

pub const NAMES: [&str; 6] = ["tangent2d", "so3", "Ma-default", "z2bz2", "bz2", "contact-r3"];

pub const TANGENT2D: &str = include_str!("../fixtures/tangent2d.json");
pub const SO3: &str = include_str!("../fixtures/so3.json");
pub const MA_DEFAULT: &str = include_str!("../fixtures/Ma-default.json");
pub const Z2BZ2: &str = include_str!("../fixtures/z2bz2.json");
pub const BZ2: &str = include_str!("../fixtures/bz2.json");
pub const CONTACT_R3: &str = include_str!("../fixtures/contact-r3.json");

pub fn text(name: &str) -> Result<&'static str, InputError> {
    Ok(match name {
        "tangent2d" => TANGENT2D,
        "so3" => SO3,
        "Ma-default" => MA_DEFAULT,
        "z2bz2" => Z2BZ2,
        "bz2" => BZ2,
        "contact-r3" => CONTACT_R3,
        _ => return Err(InputError::UnknownFixture(name.into())),
    })
}

/// Sphere family scan: `a(r)` and the radius grid.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyScan {
    pub a: String,
    pub r_min: f64,
    pub r_max: f64,
    pub steps: usize,
}

pub fn family_scan(text: &str) -> Result<FamilyScan, InputError> {
    serde_json::from_str(text).map_err(|e| InputError::Json(e.to_string()))
}

pub fn algebroid(text: &str) -> Result<ChartedAlgebroid, InputError> {
    ChartedAlgebroid::from_json(text).map_err(|e| InputError::Invalid(e.to_string()))
}

pub fn model(text: &str) -> Result<WeinsteinModel, InputError> {
    WeinsteinModel::from_json(text).map_err(|e| InputError::Invalid(e.to_string()))
}

pub fn contact(text: &str) -> Result<ContactChart, InputError> {
    ContactChart::from_json(text).map_err(|e| InputError::Invalid(e.to_string()))
}

pub fn family(scan: &FamilyScan) -> Result<SphereFamily, InputError> {
    SphereFamily::parse(&scan.a).map_err(|e| InputError::Invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves() {
        for n in NAMES {
            assert!(text(n).is_ok(), "{}", n);
        }
        assert!(matches!(text("nope"), Err(InputError::UnknownFixture(_))));
    }

    #[test]
    fn algebroid_files_match_their_constructors() {
        assert_eq!(algebroid(TANGENT2D).unwrap().to_json(), ChartedAlgebroid::tangent(2).to_json());
        assert_eq!(algebroid(SO3).unwrap().to_json(), ChartedAlgebroid::so3().to_json());
    }

    #[test]
    fn model_files_match_their_constructors() {
        assert_eq!(model(Z2BZ2).unwrap().to_json(), WeinsteinModel::z2_bz2().to_json());
        assert_eq!(model(BZ2).unwrap().to_json(), WeinsteinModel::bz2().to_json());
    }

    #[test]
    fn contact_and_family_files_match_their_constructors() {
        let c = contact(CONTACT_R3).unwrap();
        let std = ContactChart::standard_r3();
        assert_eq!(c.coords(), std.coords());
        let x = [0.3, -0.7, 1.1];
        for (a, b) in c.theta().iter().zip(std.theta()) {
            assert_eq!(a.eval(c.coords(), &x).unwrap(), b.eval(std.coords(), &x).unwrap());
        }
        let scan = family_scan(MA_DEFAULT).unwrap();
        assert_eq!((scan.r_min, scan.r_max, scan.steps), (0.1, 20.0, 2000));
        let fam = family(&scan).unwrap();
        let dflt = SphereFamily::default_family();
        for r in [0.1, 1.0, 7.5] {
            assert_eq!(fam.a().eval(&["r".to_string()], &[r]).unwrap(), dflt.a().eval(&["r".to_string()], &[r]).unwrap());
        }
    }
}
