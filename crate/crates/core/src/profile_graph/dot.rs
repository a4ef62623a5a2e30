use std::fmt::Write;

use super::{EdgeClass, ProfileGraph, VertexKind};

impl ProfileGraph {
    /// Graphviz rendering: full edges solid, dotted edges dashed and labelled
    /// with their level set, square vertices box-shaped.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph profile {\n");
        for (a, name) in self.vertices().iter().enumerate() {
            let shape = match self.kind(a) {
                VertexKind::Circle => "circle",
                VertexKind::Square => "box",
            };
            let _ = writeln!(out, "  \"{name}\" [shape={shape}];");
        }
        for (a, b) in self.pairs() {
            let (na, nb) = (self.vertex_name(a), self.vertex_name(b));
            match self.edge_class(a, b) {
                EdgeClass::Missing => {}
                EdgeClass::Full => {
                    let _ = writeln!(out, "  \"{na}\" -- \"{nb}\" [style=solid];");
                }
                EdgeClass::Dotted => {
                    let label = self.label(a, b).names(self.levels()).join(",");
                    let _ = writeln!(out, "  \"{na}\" -- \"{nb}\" [style=dashed, label=\"{label}\"];");
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::figure_one;

    #[test]
    fn figure_one_edge_inventory() {
        let dot = figure_one().to_dot();
        assert_eq!(dot.matches("style=dashed").count(), 3);
        assert_eq!(dot.matches("style=solid").count(), 1);
        assert!(dot.contains("\"b\" -- \"c\" [style=dashed, label=\"1,2\"]"));
        assert!(!dot.contains("\"a\" -- \"d\""));
    }
}
