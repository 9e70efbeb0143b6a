//! Text fixtures: flag data (`.alg`), general homogeneous data (`.datum`)
//! and Euclidean charts (`.chart`), all in TOML.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chart::{ChartDistribution, ChartSpec};
use crate::error::{Error, Result};
use crate::grading::{grade, grading_element, GradedDecomposition};
use crate::hyperbolicity::{canonical_datum, DatumSpec, HomogeneousDatum};
use crate::lie::{apply_real_form, build_for_type, BasisData, CartanType, EpsilonLabels, RealFormData};

/// Flag domain datum: Cartan type, `ε` on simple roots (`1` noncompact,
/// `-1` compact) and the simple roots lying in `v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgSpec {
    #[serde(default)]
    pub name: String,
    pub cartan_type: String,
    pub epsilon_simple: Vec<i8>,
    #[serde(default)]
    pub v_simple: Vec<usize>,
}

pub struct FlagFixture {
    pub spec: AlgSpec,
    pub basis: Arc<BasisData>,
    pub real_form: RealFormData,
    pub grading: GradedDecomposition,
}

impl FlagFixture {
    pub fn from_spec(spec: AlgSpec) -> Result<Self> {
        let ct: CartanType = spec.cartan_type.parse()?;
        let basis = Arc::new(build_for_type(ct));
        let eps = EpsilonLabels::from_simple(&basis.roots, &spec.epsilon_simple)?;
        let real_form = apply_real_form(&basis, &eps)?;
        let t = grading_element(&basis.roots, &spec.v_simple)?;
        let grading = grade(&basis, &t)?;
        Ok(Self { spec, basis, real_form, grading })
    }

    pub fn datum(&self) -> Result<HomogeneousDatum> {
        let mut hd = canonical_datum(&self.real_form, &self.grading)?;
        if !self.spec.name.is_empty() {
            hd.name = self.spec.name.clone();
        }
        Ok(hd)
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Fixture(format!("{what}: {e}")))
}

pub fn parse_alg(text: &str) -> Result<FlagFixture> {
    FlagFixture::from_spec(parse(text, "alg fixture")?)
}

pub fn parse_datum(text: &str) -> Result<HomogeneousDatum> {
    HomogeneousDatum::from_spec(&parse::<DatumSpec>(text, "datum fixture")?)
}

pub fn parse_chart(text: &str) -> Result<ChartDistribution> {
    ChartDistribution::from_spec(&parse::<ChartSpec>(text, "chart fixture")?)
}

pub fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| Error::Fixture(e.to_string()))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))
}

/// A homogeneous datum from either a `.alg` or a `.datum` file.
pub enum AnyDatum {
    Flag(Box<FlagFixture>),
    General(HomogeneousDatum),
}

impl AnyDatum {
    pub fn datum(&self) -> Result<HomogeneousDatum> {
        match self {
            AnyDatum::Flag(f) => f.datum(),
            AnyDatum::General(hd) => Ok(hd.clone()),
        }
    }
}

pub fn load_alg(path: &Path) -> Result<FlagFixture> {
    parse_alg(&read(path)?)
}

pub fn load_chart(path: &Path) -> Result<ChartDistribution> {
    parse_chart(&read(path)?)
}

pub fn load_datum(path: &Path) -> Result<AnyDatum> {
    let text = read(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("datum") => Ok(AnyDatum::General(parse_datum(&text)?)),
        _ => Ok(AnyDatum::Flag(Box::new(parse_alg(&text)?))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::heisenberg;
    use crate::hyperbolicity::sl2c_real_datum;

    #[test]
    fn alg_text() {
        let f = parse_alg("cartan_type = \"A2\"\nepsilon_simple = [1, 1]\n").unwrap();
        let dims: Vec<usize> = f.grading.dims().into_iter().map(|d| d.1).collect();
        assert_eq!(dims, vec![1, 2, 2, 2, 1]);
        let err = parse_alg("cartan_type = \"A2\"\nepsilon_simple = [1, 1]\nbogus = 1\n").err().unwrap();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn roundtrips() {
        let hd = sl2c_real_datum();
        let back = parse_datum(&to_toml(&hd.to_spec()).unwrap()).unwrap();
        assert_eq!(back.j, hd.j);
        assert_eq!(*back.algebra, *hd.algebra);
        let h = heisenberg(2.0);
        let back = parse_chart(&to_toml(&h.to_spec()).unwrap()).unwrap();
        assert_eq!(back.to_spec().frame.len(), 2);
    }
}
