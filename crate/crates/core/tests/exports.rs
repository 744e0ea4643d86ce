use std::collections::HashMap;

use ply_rs::parser::Parser;
use ply_rs::ply::{DefaultElement, Property};

use verne_core::config::reference_geometry;
use verne_core::export::{build_boundary_mesh, write_ply, write_point_cloud, write_slice_svg, MeshParams, CSV_HEADER};
use verne_core::sweep::{slice_at, sweep, SweepParams};

fn small_params() -> SweepParams {
    let g = reference_geometry();
    SweepParams { alpha_steps: 41, arc_samples: 96, z_steps: 15, ..SweepParams::defaults(&g) }
}

#[test]
fn csv_parses_back_to_the_cloud() {
    let g = reference_geometry();
    let (cloud, _) = sweep(&g, &small_params()).unwrap();
    let mut buf = Vec::new();
    let n = write_point_cloud(&cloud, &mut buf).unwrap();
    assert_eq!(n, buf.len());
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let header: Vec<String> = reader.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(header.join(","), CSV_HEADER);
    let mut count = 0;
    for (record, row) in reader.records().zip(&cloud.rows) {
        let record = record.unwrap();
        let values: Vec<f64> = record.iter().map(|s| s.parse().unwrap()).collect();
        let expected = [row.x, row.y, row.z, row.alpha, row.rho1, row.rho2, row.rho3];
        for (v, e) in values.iter().zip(expected) {
            assert!((v - e).abs() <= 1e-11 * e.abs().max(1.0), "{v} vs {e}");
        }
        count += 1;
    }
    assert_eq!(count, cloud.len());
}

#[test]
fn ply_parses_back_exactly() {
    let g = reference_geometry();
    let (_, set) = sweep(&g, &small_params()).unwrap();
    let mesh = build_boundary_mesh(&g, &set, &MeshParams { resolution: 40, ..MeshParams::default() }).unwrap();
    let mut buf = Vec::new();
    write_ply(&mesh, &mut buf).unwrap();
    let ply = Parser::<DefaultElement>::new().read_ply(&mut buf.as_slice()).unwrap();
    let vertices = &ply.payload["vertex"];
    let faces = &ply.payload["face"];
    assert_eq!(vertices.len(), mesh.vertices.len());
    assert_eq!(faces.len(), mesh.triangles.len());
    let scalar = |e: &DefaultElement, k: &str| match e[k] {
        Property::Double(v) => v,
        ref p => panic!("{k}: {p:?}"),
    };
    for (e, v) in vertices.iter().zip(&mesh.vertices) {
        assert_eq!([scalar(e, "x"), scalar(e, "y"), scalar(e, "z")], *v);
    }
    for (e, t) in faces.iter().zip(&mesh.triangles) {
        match &e["vertex_indices"] {
            Property::ListInt(ix) => assert_eq!(ix.iter().map(|&i| i as usize).collect::<Vec<_>>(), t.to_vec()),
            p => panic!("{p:?}"),
        }
    }
}

#[test]
fn svg_is_well_formed() {
    let g = reference_geometry();
    let params = small_params();
    let (_, set) = sweep(&g, &params).unwrap();
    let slice = slice_at(&g, 1.1, &params).unwrap();
    let mut buf = Vec::new();
    write_slice_svg(&slice, &set.bounds, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    let view: Vec<f64> = root.attribute("viewBox").unwrap().split(' ').map(|s| s.parse().unwrap()).collect();
    let b = set.bounds;
    for (v, e) in view.iter().zip([b.x_min, b.y_min, b.width(), b.depth()]) {
        assert!((v - e).abs() < 1e-11, "{v} vs {e}");
    }
    let intervals: usize = slice.arcs.iter().map(|a| a.intervals.len()).sum();
    assert!(intervals > 0);
    let polylines: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("polyline")).collect();
    assert_eq!(polylines.len(), intervals);
    let mut per_alpha: HashMap<String, usize> = HashMap::new();
    for p in &polylines {
        *per_alpha.entry(p.attribute("data-alpha").unwrap().to_string()).or_default() += 1;
        for pair in p.attribute("points").unwrap().split(' ') {
            let (x, y) = pair.split_once(',').unwrap();
            let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
            assert!(x > b.x_min && x < b.x_max && y > b.y_min && y < b.y_max);
        }
    }
    assert!(per_alpha.len() > 1);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let g = reference_geometry();
    let params = small_params();
    let render = || {
        let (cloud, set) = sweep(&g, &params).unwrap();
        let mesh = build_boundary_mesh(&g, &set, &MeshParams { resolution: 32, ..MeshParams::default() }).unwrap();
        let (mut c, mut p, mut s) = (Vec::new(), Vec::new(), Vec::new());
        write_point_cloud(&cloud, &mut c).unwrap();
        write_ply(&mesh, &mut p).unwrap();
        write_slice_svg(&set.slices[7], &set.bounds, &mut s).unwrap();
        (c, p, s)
    };
    assert_eq!(render(), render());
}
