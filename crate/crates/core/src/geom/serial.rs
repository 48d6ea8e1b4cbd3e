use serde::{Deserialize, Serialize};

use super::{GeomError, Halfspace, Polytope, Side, Vector};

/// Wire form `{"d", "halfspaces": [[[u...], t, eps], ...], "vertices": [[x...]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeJson {
    pub d: usize,
    pub halfspaces: Vec<(Vec<f64>, f64, i8)>,
    pub vertices: Vec<Vec<f64>>,
}

impl From<&Polytope> for PolytopeJson {
    fn from(p: &Polytope) -> Self {
        PolytopeJson {
            d: p.dim(),
            halfspaces: p
                .halfspaces()
                .iter()
                .map(|h| (h.normal.iter().copied().collect(), h.offset, h.eps()))
                .collect(),
            vertices: p.vertices().iter().map(|v| v.iter().copied().collect()).collect(),
        }
    }
}

impl TryFrom<PolytopeJson> for Polytope {
    type Error = GeomError;

    fn try_from(j: PolytopeJson) -> Result<Polytope, GeomError> {
        let hs = j
            .halfspaces
            .into_iter()
            .map(|(u, t, eps)| {
                if u.len() != j.d {
                    return Err(GeomError::DimensionMismatch { expected: j.d, got: u.len() });
                }
                let side = Side::from_eps(eps)
                    .ok_or_else(|| GeomError::InvalidHalfspace(format!("eps must be +1 or -1, got {eps}")))?;
                Halfspace::new(Vector::from_vec(u), t, side)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let vs = j.vertices.into_iter().map(Vector::from_vec).collect();
        Polytope::from_parts(hs, vs)
    }
}

impl Polytope {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&PolytopeJson::from(self)).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Polytope, GeomError> {
        let j: PolytopeJson =
            serde_json::from_str(s).map_err(|e| GeomError::Argument(format!("polytope JSON: {e}")))?;
        Polytope::try_from(j)
    }
}
