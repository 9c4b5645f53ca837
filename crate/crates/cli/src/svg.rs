use std::fmt::Write as _;
use std::path::Path;

use courant_core::geometry::Polygon;
use courant_core::nodal::{Label, NodalPartition};

pub const POSITIVE_FILL: &str = "#d6604d";
pub const NEGATIVE_FILL: &str = "#4393c3";
pub const BAND_FILL: &str = "#9e9e9e";

/// Renders a partition as one filled path per nodal domain plus one for the zero band,
/// with `outline` stroked on top. Each grid node is a unit pixel; the output depends only
/// on the partition and the outline.
pub fn emit_svg(partition: &NodalPartition, outline: &Polygon) -> String {
    let g = &partition.grid;
    let (nx, ny) = (g.nx, g.ny);
    let mut domains = vec![String::new(); partition.beta0];
    let mut band = String::new();
    for run in partition.runs() {
        let target = match run.label {
            Label::Outside => continue,
            Label::ZeroBand => &mut band,
            Label::Domain(d) => &mut domains[d as usize],
        };
        let _ = write!(target, "M{} {}h{}v1h-{}z", run.start, ny - 1 - run.row, run.end - run.start, run.end - run.start);
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{nx}" height="{ny}" viewBox="0 0 {nx} {ny}" shape-rendering="crispEdges">"#
    );
    let _ = writeln!(out, "<title>{} nodal domains</title>", partition.beta0);
    for (d, path) in domains.iter().enumerate() {
        let fill = if partition.signs[d] > 0 { POSITIVE_FILL } else { NEGATIVE_FILL };
        let _ = writeln!(out, r#"<path id="domain-{d}" fill="{fill}" d="{path}"/>"#);
    }
    if !band.is_empty() {
        let _ = writeln!(out, r#"<path id="zero-band" fill="{BAND_FILL}" d="{band}"/>"#);
    }
    let points: Vec<String> = outline
        .vertices
        .iter()
        .map(|p| {
            let x = (p[0] - g.origin[0]) / g.h + 0.5;
            let y = ny as f64 - ((p[1] - g.origin[1]) / g.h + 0.5);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    let _ = writeln!(
        out,
        r#"<polygon id="outline" fill="none" stroke="black" stroke-width="2" points="{}"/>"#,
        points.join(" ")
    );
    out.push_str("</svg>\n");
    out
}

pub fn write_svg(path: &Path, partition: &NodalPartition, outline: &Polygon) -> std::io::Result<()> {
    std::fs::write(path, emit_svg(partition, outline))
}
