//! The three-vertex base graph Γ₁ (white, grey, shaded) and the six-vertex
//! balanced fair graph Λ₁ over it, bundled as JSON documents.

use std::sync::Arc;

use crate::fair::FairGraph;
use crate::graph::BiGraph;
use crate::io::{parse, read_fair_graph, read_gamma};

pub const GAMMA1_JSON: &str = include_str!("../fixtures/gamma1.json");
pub const LAMBDA1_JSON: &str = include_str!("../fixtures/lambda1.json");

pub fn gamma1() -> Arc<BiGraph> {
    let doc = parse(GAMMA1_JSON.as_bytes()).expect("bundled fixture parses");
    Arc::new(read_gamma(&doc).expect("bundled fixture is valid"))
}

pub fn lambda1() -> FairGraph {
    let doc = parse(LAMBDA1_JSON.as_bytes()).expect("bundled fixture parses");
    read_fair_graph(&doc, None, Some(&gamma1())).expect("bundled fixture is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fair::{check_fair, find_balanced_involution};
    use crate::graph::{is_connected, validate_bigraph};

    #[test]
    fn gamma1_shape() {
        let g = gamma1();
        assert!(validate_bigraph(&g.to_data()).ok);
        assert!(is_connected(&g));
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 8);
    }

    #[test]
    fn lambda1_is_balanced_and_fair() {
        let l = lambda1();
        assert_eq!(l.vertex_count(), 6);
        assert_eq!(l.edge_count(), 26);
        assert!(check_fair(&l, 1e-12).ok);
        assert!(find_balanced_involution(&l, 1e-12).unwrap().is_some());
    }
}
