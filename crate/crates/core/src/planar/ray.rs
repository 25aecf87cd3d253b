use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Polyline of a billiard trajectory. Interior vertices are reflection
/// points; for a closed orbit the first vertex is repeated at the end and
/// every vertex is a reflection point.
#[derive(Debug, Clone, PartialEq)]
pub struct BrokenRay {
    vertices: Vec<Vec2>,
    closed: bool,
    length: f64,
}

#[derive(Serialize, Deserialize)]
struct Wire {
    vertices: Vec<[f64; 2]>,
    length: f64,
    reflections: usize,
}

impl BrokenRay {
    pub fn open(vertices: Vec<Vec2>) -> Self {
        assert!(vertices.len() >= 2, "a broken ray needs two vertices");
        let length = polyline_length(&vertices);
        Self {
            vertices,
            closed: false,
            length,
        }
    }

    pub fn closed(mut vertices: Vec<Vec2>) -> Self {
        assert!(vertices.len() >= 2, "a closed orbit needs two vertices");
        if vertices.first() != vertices.last() {
            vertices.push(vertices[0]);
        }
        let length = polyline_length(&vertices);
        Self {
            vertices,
            closed: true,
            length,
        }
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn reflections(&self) -> usize {
        if self.closed {
            self.vertices.len() - 1
        } else {
            self.vertices.len() - 2
        }
    }

    pub fn segments(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn start(&self) -> Vec2 {
        self.vertices[0]
    }

    pub fn end(&self) -> Vec2 {
        *self.vertices.last().unwrap()
    }

    /// Unit direction of the last segment.
    pub fn exit_direction(&self) -> Vec2 {
        let n = self.vertices.len();
        (self.vertices[n - 1] - self.vertices[n - 2]).normalized()
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Self {
            vertices: v,
            closed: self.closed,
            length: self.length,
        }
    }

    /// Incoming and outgoing unit directions at each reflection vertex.
    pub fn turns(&self) -> Vec<(Vec2, Vec2, Vec2)> {
        let v = &self.vertices;
        let mut out = Vec::new();
        for k in 1..v.len() - 1 {
            out.push((
                v[k],
                (v[k] - v[k - 1]).normalized(),
                (v[k + 1] - v[k]).normalized(),
            ));
        }
        if self.closed && v.len() >= 3 {
            let n = v.len();
            out.push((
                v[0],
                (v[0] - v[n - 2]).normalized(),
                (v[1] - v[0]).normalized(),
            ));
        }
        out
    }

    /// Largest `|d⁺ − (d⁻ − 2(d⁻·n)n)|` over all reflections, with `n` the
    /// unit normal supplied for each reflection point.
    pub fn reflection_residual<N: Fn(Vec2) -> Vec2>(&self, normal_at: N) -> f64 {
        self.turns()
            .into_iter()
            .map(|(p, din, dout)| {
                let n = normal_at(p);
                (dout - (din - n * (2.0 * din.dot(n)))).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        let w = Wire {
            vertices: self.vertices.iter().map(|&v| v.into()).collect(),
            length: self.length,
            reflections: self.reflections(),
        };
        serde_json::to_string(&w).expect("broken ray serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: Wire = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if w.vertices.len() < 2 {
            return Err(Error::Parse(
                "broken ray needs at least two vertices".into(),
            ));
        }
        let v: Vec<Vec2> = w.vertices.into_iter().map(Vec2::from).collect();
        let closed = v.len() >= 3 && v.first() == v.last();
        let ray = if closed {
            Self::closed(v)
        } else {
            Self::open(v)
        };
        if ray.reflections() != w.reflections {
            return Err(Error::Parse(format!(
                "reflection count {} disagrees with {} vertices",
                w.reflections,
                ray.vertices.len()
            )));
        }
        Ok(ray)
    }
}

fn polyline_length(v: &[Vec2]) -> f64 {
    v.windows(2).map(|w| w[0].dist(w[1])).sum()
}
