//! Plain-text exporters.

use std::fmt::Write;

/// Wavefront OBJ with 1-based face indices.
pub fn obj(vertices: &[[f64; 3]], faces: &[[usize; 3]]) -> String {
    let mut s = String::new();
    for v in vertices {
        let _ = writeln!(s, "v {} {} {}", v[0], v[1], v[2]);
    }
    for f in faces {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

#[cfg(test)]
mod tests {
    #[test]
    fn one_triangle() {
        let s = super::obj(&[[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], &[[0, 1, 2]]);
        assert!(s.ends_with("f 1 2 3\n"));
        assert_eq!(s.lines().count(), 4);
    }
}
