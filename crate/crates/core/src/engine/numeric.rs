use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Sum that does not depend on the order of `terms`: they are sorted first
/// and then accumulated with Neumaier compensation.
pub(crate) fn ordered_sum(terms: &mut [f64]) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &t in terms.iter() {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// Mean of the present samples, in index order.
pub(crate) fn mean_present(samples: &[Option<f64>]) -> (Option<f64>, usize) {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in samples.iter().flatten() {
        sum += v;
        n += 1;
    }
    if n == 0 {
        (None, 0)
    } else {
        (Some(sum / n as f64), n)
    }
}

/// `floor(x)`, except that values within 1e-12 (relative) of an integer are
/// taken to be that integer. Frame boundaries such as `3.0 * 99.7 * 10`
/// otherwise land one frame off depending on rounding.
pub(crate) fn snapped_floor(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-12 * r.abs().max(1.0) {
        r
    } else {
        x.floor()
    }
}

/// A scalar that may be undefined. Serialized as
/// `{"value": <number|null>, "defined": <bool>}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Measure(pub Option<f64>);

impl Measure {
    pub fn value(&self) -> Option<f64> {
        self.0
    }

    pub fn is_defined(&self) -> bool {
        self.0.is_some()
    }
}

impl From<Option<f64>> for Measure {
    fn from(v: Option<f64>) -> Self {
        Measure(v.filter(|x| x.is_finite()))
    }
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    value: Option<f64>,
    defined: bool,
}

impl Serialize for Measure {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MeasureRepr {
            value: self.0,
            defined: self.0.is_some(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Measure {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = MeasureRepr::deserialize(deserializer)?;
        Ok(Measure(if repr.defined { repr.value } else { None }))
    }
}
