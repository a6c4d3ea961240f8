//! JSON description of bodies.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ConvexBody;
use crate::error::{GeometryError, Result};

/// Serializable description of a [`ConvexBody`].
///
/// ```json
/// {"type": "ball", "dim": 2}
/// {"type": "hpolytope", "A": [[1, 0], [-1, 0], [0, 1], [0, -1]], "b": [1, 1, 1, 1]}
/// {"type": "product", "factors": [{"type": "ball", "dim": 2},
///                                 {"type": "hpolytope", "A": [[1], [-1]], "b": [1, 1]}]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Ball {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
    },
    Ellipsoid {
        center: Vec<f64>,
        shape: Vec<Vec<f64>>,
    },
    Hpolytope {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    Vpolytope {
        vertices: Vec<Vec<f64>>,
    },
    Product {
        factors: Vec<BodySpec>,
    },
    MinkowskiBall {
        base: Box<BodySpec>,
        radius: f64,
    },
    Affine {
        map: Vec<Vec<f64>>,
        shift: Vec<f64>,
        base: Box<BodySpec>,
    },
}

fn matrix(field: &str, rows: &[Vec<f64>], cols: Option<usize>) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(GeometryError::invalid_body(field, "matrix has no rows"));
    }
    let n = cols.unwrap_or(rows[0].len());
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(GeometryError::invalid_body(
                format!("{field}[{i}]"),
                format!("expected {n} entries, got {}", r.len()),
            ));
        }
    }
    Ok(DMatrix::from_fn(rows.len(), n, |i, k| rows[i][k]))
}

fn prefixed(prefix: &str, err: GeometryError) -> GeometryError {
    match err {
        GeometryError::InvalidBody { field, reason } => GeometryError::InvalidBody {
            field: format!("{prefix}.{field}"),
            reason,
        },
        other => other,
    }
}

impl BodySpec {
    /// Parses a JSON description.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| GeometryError::invalid_body("body", e.to_string()))
    }

    /// Builds the body, reporting the offending field on failure.
    pub fn build(&self) -> Result<ConvexBody> {
        match self {
            BodySpec::Ball {
                dim,
                center,
                radius,
            } => {
                if *dim == 0 {
                    return Err(GeometryError::invalid_body("dim", "must be at least 1"));
                }
                let c = match center {
                    Some(c) if c.len() != *dim => {
                        return Err(GeometryError::invalid_body(
                            "center",
                            format!("expected {dim} coordinates, got {}", c.len()),
                        ))
                    }
                    Some(c) => DVector::from_row_slice(c),
                    None => DVector::zeros(*dim),
                };
                ConvexBody::ball(c, radius.unwrap_or(1.0))
            }
            BodySpec::Ellipsoid { center, shape } => {
                let m = matrix("shape", shape, Some(center.len()))?;
                ConvexBody::ellipsoid(DVector::from_row_slice(center), m)
            }
            BodySpec::Hpolytope { a, b } => {
                let m = matrix("A", a, None)?;
                ConvexBody::hpolytope(m, DVector::from_row_slice(b))
            }
            BodySpec::Vpolytope { vertices } => {
                let pts: Vec<_> = vertices
                    .iter()
                    .map(|v| DVector::from_row_slice(v))
                    .collect();
                ConvexBody::vpolytope(&pts)
            }
            BodySpec::Product { factors } => {
                let built = factors
                    .iter()
                    .enumerate()
                    .map(|(i, f)| f.build().map_err(|e| prefixed(&format!("factors[{i}]"), e)))
                    .collect::<Result<Vec<_>>>()?;
                ConvexBody::product(built)
            }
            BodySpec::MinkowskiBall { base, radius } => {
                let b = base.build().map_err(|e| prefixed("base", e))?;
                ConvexBody::minkowski_ball(b, *radius)
            }
            BodySpec::Affine { map, shift, base } => {
                let b = base.build().map_err(|e| prefixed("base", e))?;
                let m = matrix("map", map, Some(b.dim()))?;
                b.affine_image(&m, &DVector::from_row_slice(shift))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        let b = BodySpec::from_json(r#"{"type":"ball","dim":2}"#)
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(b.dim(), 2);
        let cyl = BodySpec::from_json(
            r#"{"type":"product","factors":[{"type":"ball","dim":2},
                {"type":"hpolytope","A":[[1],[-1]],"b":[1,1]}]}"#,
        )
        .unwrap()
        .build()
        .unwrap();
        assert_eq!(cyl.dim(), 3);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(BodySpec::from_json(r#"{"type":"ball","dim":2,"radius2":1}"#).is_err());
        assert!(BodySpec::from_json(r#"{"type":"blob","dim":2}"#).is_err());
    }

    #[test]
    fn errors_name_the_field() {
        let err =
            BodySpec::from_json(r#"{"type":"ellipsoid","center":[0,0],"shape":[[1,0],[0,-1]]}"#)
                .unwrap()
                .build()
                .unwrap_err();
        assert!(matches!(err, GeometryError::InvalidBody { ref field, .. } if field == "shape"));
        let err = BodySpec::from_json(
            r#"{"type":"minkowski_ball","radius":0.1,"base":{"type":"hpolytope","A":[[1,0],[0,0],[-1,-1]],"b":[1,1,1]}}"#,
        )
        .unwrap()
        .build()
        .unwrap_err();
        assert!(
            matches!(err, GeometryError::InvalidBody { ref field, .. } if field == "base.A[1]")
        );
    }

    #[test]
    fn round_trips() {
        let spec = BodySpec::Ball {
            dim: 3,
            center: None,
            radius: Some(2.0),
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(BodySpec::from_json(&text).unwrap(), spec);
    }
}
