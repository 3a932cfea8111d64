//! Disk-model figures of the GAF zero set and of the matched Poisson
//! process, with their Delaunay edges and Voronoi walls.

use std::fmt::Write;

use dlattice::geometry::SpaceKind;
use dlattice::pointproc::{matched_poisson_params, sample_kac_gaf, sample_poisson, PointSample};
use dlattice::rng::derive_tagged;
use dlattice::tess::{cell_svg_path, delaunay, geodesic_svg_command, voronoi_cells, SvgFrame};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_DEGREE: u32 = 1000;
/// Side of one square panel in SVG user units.
const PANEL: f64 = 520.0;
const DISK_RADIUS: f64 = 250.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureKind {
    Gaf,
    Pv,
    Pair,
}

impl FigureKind {
    pub fn name(self) -> &'static str {
        match self {
            FigureKind::Gaf => "gaf",
            FigureKind::Pv => "pv",
            FigureKind::Pair => "pair",
        }
    }
}

/// Per-panel data, embedded as JSON in the panel's `<metadata>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelMeta {
    pub panel: String,
    pub degree: u32,
    /// Sample points inside the unit disk.
    pub in_disk_count: usize,
    /// Intensity of the Poisson panel; absent for the GAF panel.
    pub lambda: Option<f64>,
    /// Hyperbolic truncation radius of the Poisson panel.
    pub radius: Option<f64>,
    pub seed: u64,
    pub delaunay_edges: usize,
    pub voronoi_cells: usize,
}

fn gaf_sample(degree: u32, seed: u64) -> Result<(PointSample, PanelMeta), CliError> {
    let seed = derive_tagged(seed, "gaf", 0);
    let s = sample_kac_gaf(degree, seed)?;
    let meta = PanelMeta {
        panel: "gaf".into(),
        degree,
        in_disk_count: s.len(),
        lambda: None,
        radius: None,
        seed,
        delaunay_edges: 0,
        voronoi_cells: 0,
    };
    Ok((s, meta))
}

fn pv_sample(degree: u32, seed: u64) -> Result<(PointSample, PanelMeta), CliError> {
    let seed = derive_tagged(seed, "pv", 0);
    let (lambda, radius) = matched_poisson_params(degree)?;
    let s = sample_poisson(SpaceKind::HyperbolicPoincareDisk, lambda, radius, seed)?;
    let meta = PanelMeta {
        panel: "pv".into(),
        degree,
        in_disk_count: s.len(),
        lambda: Some(lambda),
        radius: Some(radius),
        seed,
        delaunay_edges: 0,
        voronoi_cells: 0,
    };
    Ok((s, meta))
}

/// One panel as an SVG group translated by `offset_x`.
fn panel(sample: &PointSample, mut meta: PanelMeta, offset_x: f64) -> Result<(String, PanelMeta), CliError> {
    let space = sample.space;
    let frame = SvgFrame { center_x: PANEL / 2.0, center_y: PANEL / 2.0, scale: DISK_RADIUS };
    let mut edges = String::new();
    let mut walls = String::new();
    if sample.len() >= 2 {
        let net = delaunay(sample)?;
        for e in net.edges() {
            let (p, q) = (net.mark(e.a), net.mark(e.b));
            let (x, y) = frame.map(p);
            let _ = write!(edges, "M{x:.4} {y:.4} {} ", geodesic_svg_command(space, p, q, &frame));
            meta.delaunay_edges += 1;
        }
        for cell in voronoi_cells(&net) {
            if let Some(d) = cell_svg_path(&cell, &frame) {
                let _ = write!(walls, "{d} ");
                meta.voronoi_cells += 1;
            }
        }
    }
    let meta_json = serde_json::to_string(&meta)?;
    let mut g = String::new();
    let _ = writeln!(
        g,
        r#"<g id="{id}" transform="translate({offset_x} 0)" data-in-disk-count="{n}">"#,
        id = meta.panel,
        n = meta.in_disk_count
    );
    let _ = writeln!(g, "<metadata>{}</metadata>", xml_escape(&meta_json));
    let c = PANEL / 2.0;
    let _ =
        writeln!(g, r##"<circle cx="{c}" cy="{c}" r="{DISK_RADIUS}" fill="none" stroke="#000" stroke-width="1"/>"##);
    if !walls.is_empty() {
        let _ = writeln!(
            g,
            r##"<path class="voronoi" d="{}" fill="none" stroke="#c33" stroke-width="0.4"/>"##,
            walls.trim_end()
        );
    }
    if !edges.is_empty() {
        let _ = writeln!(
            g,
            r##"<path class="delaunay" d="{}" fill="none" stroke="#36c" stroke-width="0.3"/>"##,
            edges.trim_end()
        );
    }
    let _ = writeln!(g, r##"<g class="points" fill="#000">"##);
    for &p in &sample.points {
        let (x, y) = frame.map(p);
        let _ = writeln!(g, r#"<circle cx="{x:.4}" cy="{y:.4}" r="1.2"/>"#);
    }
    g.push_str("</g>\n</g>\n");
    Ok((g, meta))
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// The SVG document and the metadata of its panels, left to right.
pub fn render(kind: FigureKind, degree: u32, seed: u64) -> Result<(String, Vec<PanelMeta>), CliError> {
    if degree < 2 {
        return Err(CliError::config(format!("degree must be at least 2, got {degree}")));
    }
    let samples = match kind {
        FigureKind::Gaf => vec![gaf_sample(degree, seed)?],
        FigureKind::Pv => vec![pv_sample(degree, seed)?],
        FigureKind::Pair => vec![gaf_sample(degree, seed)?, pv_sample(degree, seed)?],
    };
    let width = PANEL * samples.len() as f64;
    let mut body = String::new();
    let mut metas = Vec::new();
    for (i, (s, m)) in samples.into_iter().enumerate() {
        let (g, m) = panel(&s, m, PANEL * i as f64)?;
        body.push_str(&g);
        metas.push(m);
    }
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL}" viewBox="0 0 {width} {PANEL}">"#
    );
    svg.push_str(&body);
    svg.push_str("</svg>\n");
    Ok((svg, metas))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_degree_gives_a_legal_near_empty_figure() {
        let (svg, metas) = render(FigureKind::Gaf, 2, 5).unwrap();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(metas[0].in_disk_count <= 2);
        assert!(metas[0].delaunay_edges <= 1);
    }

    #[test]
    fn pair_has_two_panels_with_matched_parameters() {
        let (svg, metas) = render(FigureKind::Pair, 40, 1).unwrap();
        assert_eq!(metas.len(), 2);
        assert!(svg.contains(r#"id="gaf""#) && svg.contains(r#"id="pv""#));
        let (lambda, radius) = matched_poisson_params(40).unwrap();
        assert_eq!(metas[1].lambda, Some(lambda));
        assert_eq!(metas[1].radius, Some(radius));
    }
}
