//! Polygonal knots and links.
//!
//! A [`PolyKnot`] is one or more closed loops of vertices. Each loop is
//! closed implicitly (the last vertex connects back to the first) and every
//! edge shares a single spring rest length. Vertices are stored flat so the
//! force loops can index them globally; component boundaries are kept as
//! offsets.

mod io;
mod linking;
mod torus;

pub use io::{load_knot, parse_plain, parse_structured, save_knot, to_plain, to_structured, KnotFile, KnotFormat};
pub use linking::{linking_number, projected_crossings, rotation_from_seed, Linking, Rotation};
pub use torus::{generate_torus, TorusKnotSpec};

use crate::error::{KnotError, Result};
use crate::geometry::{segment_distance, Vec3};

/// One or more closed polygonal loops with a common rest edge length.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyKnot {
    vertices: Vec<Vec3>,
    /// `starts[c]..starts[c + 1]` is the vertex range of component `c`.
    starts: Vec<usize>,
    rest_edge_length: f64,
}

/// Closest pair of edges found by a clearance scan, as global edge indices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Clearance {
    pub distance: f64,
    pub edges: Option<(usize, usize)>,
}

impl PolyKnot {
    /// Builds a knot and checks every invariant: at least three vertices per
    /// loop, finite coordinates, no zero-length edge and no two
    /// non-adjacent edges touching.
    pub fn new(components: Vec<Vec<Vec3>>, rest_edge_length: f64) -> Result<Self> {
        let knot = Self::from_components_unchecked(components, rest_edge_length)?;
        knot.validate()?;
        Ok(knot)
    }

    /// Builds a knot checking only the cheap local invariants (loop sizes,
    /// finiteness, zero-length edges).
    pub(crate) fn from_components_unchecked(components: Vec<Vec<Vec3>>, rest_edge_length: f64) -> Result<Self> {
        if components.is_empty() {
            return Err(KnotError::Empty);
        }
        if !(rest_edge_length.is_finite() && rest_edge_length > 0.0) {
            return Err(KnotError::invalid(format!("rest edge length {rest_edge_length}")));
        }
        let mut starts = Vec::with_capacity(components.len() + 1);
        let mut vertices = Vec::with_capacity(components.iter().map(Vec::len).sum());
        for (c, comp) in components.into_iter().enumerate() {
            if comp.len() < 3 {
                return Err(KnotError::LoopTooSmall { component: c, len: comp.len() });
            }
            starts.push(vertices.len());
            vertices.extend(comp);
        }
        starts.push(vertices.len());
        let knot = PolyKnot { vertices, starts, rest_edge_length };
        knot.validate_local()?;
        Ok(knot)
    }

    fn validate_local(&self) -> Result<()> {
        if self.vertices.iter().any(|v| !v.is_finite()) {
            return Err(KnotError::NonFinite);
        }
        for e in 0..self.vertices.len() {
            let (a, b) = self.edge(e);
            if a == b {
                let c = self.component_of(e);
                return Err(KnotError::ZeroLengthEdge { component: c, vertex: e - self.starts[c] });
            }
        }
        Ok(())
    }

    /// Full invariant check, including the O(n^2) edge intersection scan.
    pub fn validate(&self) -> Result<()> {
        self.validate_local()?;
        let clearance = self.clearance(1);
        if clearance.distance <= 0.0 {
            let (e1, e2) = clearance.edges.expect("zero clearance always names a pair");
            let (c1, c2) = (self.component_of(e1), self.component_of(e2));
            return Err(KnotError::EdgesIntersect {
                c1,
                e1: e1 - self.starts[c1],
                c2,
                e2: e2 - self.starts[c2],
            });
        }
        Ok(())
    }

    pub fn num_components(&self) -> usize {
        self.starts.len() - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn component(&self, c: usize) -> &[Vec3] {
        &self.vertices[self.starts[c]..self.starts[c + 1]]
    }

    pub fn components(&self) -> impl Iterator<Item = &[Vec3]> + '_ {
        (0..self.num_components()).map(move |c| self.component(c))
    }

    /// Global index range of component `c`.
    pub fn component_range(&self, c: usize) -> std::ops::Range<usize> {
        self.starts[c]..self.starts[c + 1]
    }

    pub fn rest_edge_length(&self) -> f64 {
        self.rest_edge_length
    }

    pub fn component_of(&self, vertex: usize) -> usize {
        // `starts` is sorted and component counts are tiny.
        self.starts.partition_point(|&s| s <= vertex) - 1
    }

    /// Global index of the vertex following `i` around its loop.
    #[inline]
    pub fn next(&self, i: usize) -> usize {
        let c = self.component_of(i);
        if i + 1 == self.starts[c + 1] {
            self.starts[c]
        } else {
            i + 1
        }
    }

    /// Endpoints of edge `e` (edge `e` runs from vertex `e` to its successor).
    #[inline]
    pub fn edge(&self, e: usize) -> (Vec3, Vec3) {
        (self.vertices[e], self.vertices[self.next(e)])
    }

    /// `(start, end)` global vertex indices of every edge, loop by loop.
    pub fn edge_indices(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.vertices.len());
        for c in 0..self.num_components() {
            let r = self.component_range(c);
            for i in r.clone() {
                let j = if i + 1 == r.end { r.start } else { i + 1 };
                out.push((i, j));
            }
        }
        out
    }

    /// Cyclic separation between two edges of the same loop, `None` when
    /// they lie on different components.
    pub fn edge_separation(&self, e1: usize, e2: usize) -> Option<usize> {
        let c = self.component_of(e1);
        if c != self.component_of(e2) {
            return None;
        }
        let len = self.starts[c + 1] - self.starts[c];
        let d = e1.abs_diff(e2);
        Some(d.min(len - d))
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        self.edge_indices()
            .into_iter()
            .map(|(i, j)| self.vertices[i].distance(self.vertices[j]))
            .collect()
    }

    pub fn total_length(&self) -> f64 {
        self.edge_lengths().iter().sum()
    }

    pub fn centroid(&self) -> Vec3 {
        let sum = self.vertices.iter().fold(Vec3::ZERO, |acc, &v| acc + v);
        sum / self.vertices.len() as f64
    }

    /// Minimum distance over edge pairs whose cyclic separation exceeds
    /// `skip` (all inter-component pairs count). `skip = 1` excludes exactly
    /// the edges that share a vertex.
    pub fn clearance(&self, skip: usize) -> Clearance {
        let edges = self.edge_indices();
        // Bounding spheres: a pair whose spheres are further apart than the
        // best distance so far cannot improve on it.
        let spheres: Vec<(Vec3, f64)> = edges
            .iter()
            .map(|&(a, b)| {
                let (p, q) = (self.vertices[a], self.vertices[b]);
                ((p + q) * 0.5, 0.5 * p.distance(q))
            })
            .collect();
        let mut best = Clearance { distance: f64::INFINITY, edges: None };
        for (e1, &(a1, b1)) in edges.iter().enumerate() {
            let (p1, q1) = (self.vertices[a1], self.vertices[b1]);
            let (m1, h1) = spheres[e1];
            for (e2, &(a2, b2)) in edges.iter().enumerate().skip(e1 + 1) {
                if let Some(sep) = self.edge_separation(e1, e2) {
                    if sep <= skip {
                        continue;
                    }
                }
                let (m2, h2) = spheres[e2];
                let reach = best.distance + h1 + h2;
                let gap = m1 - m2;
                if gap.dot(gap) > reach * reach {
                    continue;
                }
                let d = segment_distance(p1, q1, self.vertices[a2], self.vertices[b2]);
                if d < best.distance {
                    best = Clearance { distance: d, edges: Some((e1, e2)) };
                }
            }
        }
        best
    }

    /// Same topology, new vertex positions (local invariants only).
    pub(crate) fn with_vertices(&self, vertices: Vec<Vec3>) -> Self {
        debug_assert_eq!(vertices.len(), self.vertices.len());
        PolyKnot { vertices, starts: self.starts.clone(), rest_edge_length: self.rest_edge_length }
    }

    pub(crate) fn set_rest_edge_length(&mut self, rest: f64) {
        self.rest_edge_length = rest;
    }

    /// Uniform scaling by `factor` about the centroid; the rest length
    /// scales with it.
    pub fn scaled(&self, factor: f64) -> Self {
        let c = self.centroid();
        let vertices = self.vertices.iter().map(|&v| c + (v - c) * factor).collect();
        PolyKnot {
            vertices,
            starts: self.starts.clone(),
            rest_edge_length: self.rest_edge_length * factor,
        }
    }

    /// Applies `f` to every vertex.
    pub fn map_vertices(&self, f: impl Fn(Vec3) -> Vec3) -> Self {
        self.with_vertices(self.vertices.iter().map(|&v| f(v)).collect())
    }

    /// Copy of the loops as owned vectors.
    pub fn to_components(&self) -> Vec<Vec<Vec3>> {
        self.components().map(<[Vec3]>::to_vec).collect()
    }
}

/// Uniformly rescales `knot` about its centroid so its total length is
/// `length`. The rest edge length is scaled by the same factor.
pub fn rescale_to_length(knot: &PolyKnot, length: f64) -> Result<PolyKnot> {
    if !(length.is_finite() && length > 0.0) {
        return Err(KnotError::invalid(format!("target length {length}")));
    }
    let factor = length / knot.total_length();
    Ok(knot.scaled(factor))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn unit_square() -> PolyKnot {
        PolyKnot::new(
            vec![vec![
                Vec3::new(0., 0., 0.),
                Vec3::new(1., 0., 0.),
                Vec3::new(1., 1., 0.),
                Vec3::new(0., 1., 0.),
            ]],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn square_basics() {
        let k = unit_square();
        assert_eq!(k.vertex_count(), 4);
        assert_eq!(k.num_components(), 1);
        assert_eq!(k.next(3), 0);
        assert_eq!(k.total_length(), 4.0);
        assert_eq!(k.clearance(1).distance, 1.0);
    }

    #[test]
    fn rescale_square() {
        let k = rescale_to_length(&unit_square(), 8.0).unwrap();
        assert!((k.total_length() - 8.0).abs() < 1e-12);
        assert!((k.vertices()[1].distance(k.vertices()[0]) - 2.0).abs() < 1e-12);
        let c = k.centroid();
        assert!((c - Vec3::new(0.5, 0.5, 0.0)).norm() < 1e-15);
        assert_eq!(k.rest_edge_length(), 2.0);
    }

    #[test]
    fn rescale_identity() {
        let k = unit_square();
        let r = rescale_to_length(&k, 4.0).unwrap();
        for (a, b) in k.vertices().iter().zip(r.vertices()) {
            assert!((*a - *b).norm() < 1e-12);
        }
        assert!(rescale_to_length(&k, 0.0).is_err());
    }

    #[test]
    fn rejects_small_loops_and_crossings() {
        let err = PolyKnot::new(vec![vec![Vec3::ZERO, Vec3::new(1., 0., 0.)]], 1.0).unwrap_err();
        assert!(matches!(err, KnotError::LoopTooSmall { component: 0, len: 2 }));

        // bow-tie: edges 0 and 2 cross
        let bow = vec![
            Vec3::new(0., 0., 0.),
            Vec3::new(1., 1., 0.),
            Vec3::new(1., 0., 0.),
            Vec3::new(0., 1., 0.),
        ];
        let err = PolyKnot::new(vec![bow], 1.0).unwrap_err();
        assert!(matches!(err, KnotError::EdgesIntersect { c1: 0, e1: 0, c2: 0, e2: 2 }));

        let dup = vec![Vec3::ZERO, Vec3::ZERO, Vec3::new(1., 0., 0.)];
        assert!(matches!(
            PolyKnot::new(vec![dup], 1.0),
            Err(KnotError::ZeroLengthEdge { component: 0, vertex: 0 })
        ));
    }

    #[test]
    fn separation_and_components() {
        let tri = vec![Vec3::ZERO, Vec3::new(1., 0., 0.), Vec3::new(0., 1., 0.)];
        let tri2: Vec<Vec3> = tri.iter().map(|&v| v + Vec3::new(0., 0., 5.)).collect();
        let k = PolyKnot::new(vec![tri, tri2], 1.0).unwrap();
        assert_eq!(k.component_of(2), 0);
        assert_eq!(k.component_of(3), 1);
        assert_eq!(k.next(5), 3);
        assert_eq!(k.edge_separation(0, 2), Some(1));
        assert_eq!(k.edge_separation(0, 4), None);
        assert!((k.clearance(1).distance - 5.0).abs() < 1e-12);
    }
}
