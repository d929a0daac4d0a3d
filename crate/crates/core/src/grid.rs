use serde::{Deserialize, Serialize};

/// One axis of a parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "spacing", rename_all = "lowercase")]
pub enum GridSpec {
    Linear { start: f64, end: f64, points: usize },
    Log { start: f64, end: f64, points: usize },
    List { values: Vec<f64> },
}

impl GridSpec {
    pub fn linear(start: f64, end: f64, points: usize) -> Self {
        GridSpec::Linear { start, end, points }
    }

    pub fn log(start: f64, end: f64, points: usize) -> Self {
        GridSpec::Log { start, end, points }
    }

    pub fn list<I: IntoIterator<Item = f64>>(values: I) -> Self {
        GridSpec::List {
            values: values.into_iter().collect(),
        }
    }

    pub fn integers<I: IntoIterator<Item = usize>>(values: I) -> Self {
        Self::list(values.into_iter().map(|v| v as f64))
    }

    /// Node values in increasing index order. Endpoints are reproduced exactly.
    pub fn values(&self) -> Vec<f64> {
        match *self {
            GridSpec::Linear { start, end, points } => spaced(start, end, points, |s, e, f| {
                s + (e - s) * f
            }),
            GridSpec::Log { start, end, points } => {
                assert!(start > 0.0 && end > 0.0, "log grid needs positive bounds");
                spaced(start, end, points, |s, e, f| (s.ln() + (e.ln() - s.ln()) * f).exp())
            }
            GridSpec::List { ref values } => values.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            GridSpec::Linear { points, .. } | GridSpec::Log { points, .. } => *points,
            GridSpec::List { values } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn spaced<F: Fn(f64, f64, f64) -> f64>(start: f64, end: f64, points: usize, f: F) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..points)
            .map(|i| {
                if i == 0 {
                    start
                } else if i == points - 1 {
                    end
                } else {
                    f(start, end, i as f64 / (points - 1) as f64)
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_exact() {
        let g = GridSpec::log(0.05, 20.0, 200).values();
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], 0.05);
        assert_eq!(g[199], 20.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(GridSpec::linear(0.0, 1.0, 3).values(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn serializes_with_spacing_tag() {
        let json = serde_json::to_string(&GridSpec::log(1.0, 2.0, 3)).unwrap();
        assert!(json.contains("\"spacing\":\"log\""));
        let back: GridSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, GridSpec::log(1.0, 2.0, 3));
    }
}
