//! Wavefront OBJ export of the faces around the fundamental vertices.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{HullSurface, Label};

/// Star faces of every fundamental vertex, vertices in chart coordinates.
pub fn to_obj(s: &HullSurface) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# side {:?}, orbit radius {}", s.side, s.max_len);
    let mut index: HashMap<Label, usize> = HashMap::new();
    let mut faces: Vec<Vec<usize>> = Vec::new();
    for star in &s.stars {
        for f in star {
            let mut ids = Vec::with_capacity(f.vertices.len());
            for l in &f.vertices {
                if let Some(&i) = index.get(l) {
                    ids.push(i);
                    continue;
                }
                let x = s.config.element_matrix(&l.word) * s.config.points[l.id];
                let Some(z) = s.chart_coords(&x) else {
                    continue;
                };
                let _ = writeln!(out, "# vertex {} {}", l.id, l.word);
                let _ = writeln!(out, "v {:.16e} {:.16e} {:.16e}", z[0], z[1], z[2]);
                index.insert(l.clone(), index.len() + 1);
                ids.push(index.len());
            }
            if ids.len() == f.vertices.len() && !faces.contains(&ids) {
                faces.push(ids);
            }
        }
    }
    for f in faces {
        let idx: Vec<String> = f.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "f {}", idx.join(" "));
    }
    out
}
