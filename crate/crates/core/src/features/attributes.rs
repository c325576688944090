//! Demographic mixing features. Unknown attribute values never enter a
//! numerator or a denominator; a feature whose denominator is empty is
//! reported as missing (`None`).

use serde::{Deserialize, Serialize};

use crate::graph::{Graph, Sex};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AttributeFeatures {
    /// Female share of sex-known nodes with degree >= 1.
    pub frac_female: Option<f64>,
    /// Share of sex-known edges joining a male and a female.
    pub frac_male_female: Option<f64>,
    /// Mean absolute age difference over age-known edges.
    pub avg_age_diff: Option<f64>,
    /// Share of zip-known edges whose endpoints share a zip.
    pub frac_same_zip: Option<f64>,
}

fn ratio(num: f64, den: usize) -> Option<f64> {
    (den > 0).then(|| num / den as f64)
}

pub fn attribute_features(g: &Graph) -> AttributeFeatures {
    let Some(attrs) = g.attributes() else {
        return AttributeFeatures::default();
    };

    let (mut female, mut sex_known) = (0usize, 0usize);
    for (v, a) in attrs.iter().enumerate() {
        if g.degree(v) == 0 || a.sex == Sex::Unknown {
            continue;
        }
        sex_known += 1;
        female += usize::from(a.sex == Sex::Female);
    }

    let (mut mixed, mut sex_edges) = (0usize, 0usize);
    let (mut age_sum, mut age_edges) = (0u64, 0usize);
    let (mut same_zip, mut zip_edges) = (0usize, 0usize);
    for (u, v) in g.edges() {
        let (a, b) = (&attrs[u], &attrs[v]);
        if a.sex != Sex::Unknown && b.sex != Sex::Unknown {
            sex_edges += 1;
            mixed += usize::from(a.sex != b.sex);
        }
        if let (Some(x), Some(y)) = (a.age, b.age) {
            age_edges += 1;
            age_sum += u64::from(x.abs_diff(y));
        }
        if let (Some(x), Some(y)) = (&a.zip, &b.zip) {
            zip_edges += 1;
            same_zip += usize::from(x == y);
        }
    }

    AttributeFeatures {
        frac_female: ratio(female as f64, sex_known),
        frac_male_female: ratio(mixed as f64, sex_edges),
        avg_age_diff: ratio(age_sum as f64, age_edges),
        frac_same_zip: ratio(same_zip as f64, zip_edges),
    }
}
