//! Flat `key = value` machine configuration.
//!
//! One assignment per line, `#` starts a comment. Every key is required and
//! unknown keys are rejected. Joint keys look like `base_joint.11.psi` or
//! `platform_joint.31.profile = (-0.5:0.2, 0.0:0.3, 0.5:0.2)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{JointLimitProfile, JointMount, MachineGeometry, Rod, Stroke};

/// Text of the reference machine G0.
pub const REFERENCE_CONFIG: &str = include_str!("../data/g0.conf");

const SCALAR_KEYS: [&str; 21] = [
    "D1",
    "d1",
    "D2",
    "d2",
    "R1",
    "r1",
    "R2",
    "r4",
    "L1",
    "L2",
    "L3",
    "rho1_min",
    "rho1_max",
    "rho2_min",
    "rho2_max",
    "rho3_min",
    "rho3_max",
    "z_hood",
    "z_tilting_table",
    "l_p1",
    "l_p2",
];

const JOINT_SIDES: [&str; 2] = ["base_joint", "platform_joint"];
const JOINT_FIELDS: [&str; 4] = ["psi", "theta", "phi", "profile"];

/// The reference machine G0; panics only if the shipped file is broken.
pub fn reference_geometry() -> MachineGeometry {
    load_machine_config(REFERENCE_CONFIG).expect("shipped reference config is valid")
}

pub fn load_machine_config_file(path: impl AsRef<Path>) -> Result<MachineGeometry> {
    let text = std::fs::read_to_string(path)?;
    load_machine_config(&text)
}

/// Parses and validates a configuration document.
pub fn load_machine_config(text: &str) -> Result<MachineGeometry> {
    let geom = parse_machine_config(text)?;
    geom.validate()?;
    Ok(geom)
}

/// Parses without checking geometry invariants.
pub fn parse_machine_config(text: &str) -> Result<MachineGeometry> {
    let entries = read_entries(text)?;
    let scalar = |key: &str| -> Result<f64> {
        let (line, raw) = entries
            .get(key)
            .ok_or_else(|| Error::Parse { line: 0, message: format!("missing key `{key}`") })?;
        parse_number(raw, *line, key)
    };
    let mount = |side: &str, rod: Rod| -> Result<JointMount> {
        let key = |field: &str| format!("{side}.{}.{field}", rod.label());
        let profile_key = key("profile");
        let (line, raw) = entries.get(profile_key.as_str()).ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("missing key `{profile_key}`"),
        })?;
        let profile = parse_profile(raw, *line)?;
        Ok(JointMount {
            psi: scalar(&key("psi"))?,
            theta: scalar(&key("theta"))?,
            phi: scalar(&key("phi"))?,
            profile,
        })
    };
    let mounts = |side: &str| -> Result<[JointMount; 4]> {
        Ok([
            mount(side, Rod::R11)?,
            mount(side, Rod::R12)?,
            mount(side, Rod::R21)?,
            mount(side, Rod::R31)?,
        ])
    };
    let stroke = |n: usize| -> Result<Stroke> {
        Ok(Stroke { min: scalar(&format!("rho{n}_min"))?, max: scalar(&format!("rho{n}_max"))? })
    };

    Ok(MachineGeometry {
        platform_x1: scalar("D1")?,
        slider_x1: scalar("d1")?,
        platform_x2: scalar("D2")?,
        slider_x2: scalar("d2")?,
        platform_y1: scalar("R1")?,
        slider_y1: scalar("r1")?,
        platform_y2: scalar("R2")?,
        slider_y2: scalar("r4")?,
        rod_lengths: [scalar("L1")?, scalar("L2")?, scalar("L3")?],
        strokes: [stroke(1)?, stroke(2)?, stroke(3)?],
        base_joints: mounts("base_joint")?,
        platform_joints: mounts("platform_joint")?,
        z_hood: scalar("z_hood")?,
        z_tilting_table: scalar("z_tilting_table")?,
        l_p1: scalar("l_p1")?,
        l_p2: scalar("l_p2")?,
    })
}

fn is_known_key(key: &str) -> bool {
    if SCALAR_KEYS.contains(&key) {
        return true;
    }
    let mut parts = key.split('.');
    match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some(side), Some(rod), Some(field), None) => {
            JOINT_SIDES.contains(&side) && Rod::from_label(rod).is_some() && JOINT_FIELDS.contains(&field)
        }
        _ => false,
    }
}

fn read_entries(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut entries = BTreeMap::new();
    for (n, raw_line) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(Error::Parse { line, message: "empty key or value".into() });
        }
        if !is_known_key(key) {
            return Err(Error::Parse { line, message: format!("unknown key `{key}`") });
        }
        if entries.insert(key.to_string(), (line, value.to_string())).is_some() {
            return Err(Error::Parse { line, message: format!("duplicate key `{key}`") });
        }
    }
    Ok(entries)
}

fn parse_number(raw: &str, line: usize, key: &str) -> Result<f64> {
    raw.parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("`{key}`: `{raw}` is not a number"),
    })
}

fn parse_profile(raw: &str, line: usize) -> Result<JointLimitProfile> {
    let bad = |message: String| Error::Parse { line, message };
    let inner = raw
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| bad(format!("profile must be `(d0:b0, d1:b1, ...)`, got `{raw}`")))?;
    let mut samples = Vec::new();
    for pair in inner.split(',') {
        let pair = pair.trim();
        let (d, b) = pair
            .split_once(':')
            .ok_or_else(|| bad(format!("profile sample `{pair}` is not `delta:beta`")))?;
        let d = d.trim().parse::<f64>().map_err(|_| bad(format!("bad delta `{d}`")))?;
        let b = b.trim().parse::<f64>().map_err(|_| bad(format!("bad beta `{b}`")))?;
        samples.push((d, b));
    }
    JointLimitProfile::new(samples)
}

/// Canonical text of a geometry: fixed key order, shortest round-trip floats.
/// Loading it back yields an identical geometry.
pub fn to_config_string(geom: &MachineGeometry) -> String {
    let mut out = String::new();
    fn put_line(out: &mut String, key: &str, value: f64) {
        let _ = writeln!(out, "{key} = {value:?}");
    }
    macro_rules! put {
        ($key:expr, $value:expr) => {
            put_line(&mut out, &$key, $value)
        };
    }
    put!("D1", geom.platform_x1);
    put!("d1", geom.slider_x1);
    put!("D2", geom.platform_x2);
    put!("d2", geom.slider_x2);
    put!("R1", geom.platform_y1);
    put!("r1", geom.slider_y1);
    put!("R2", geom.platform_y2);
    put!("r4", geom.slider_y2);
    put!("L1", geom.rod_lengths[0]);
    put!("L2", geom.rod_lengths[1]);
    put!("L3", geom.rod_lengths[2]);
    for (i, s) in geom.strokes.iter().enumerate() {
        put!(&format!("rho{}_min", i + 1), s.min);
        put!(&format!("rho{}_max", i + 1), s.max);
    }
    put!("z_hood", geom.z_hood);
    put!("z_tilting_table", geom.z_tilting_table);
    put!("l_p1", geom.l_p1);
    put!("l_p2", geom.l_p2);
    for (side, mounts) in [("base_joint", &geom.base_joints), ("platform_joint", &geom.platform_joints)] {
        for rod in Rod::ALL {
            let m = &mounts[rod.index()];
            let label = rod.label();
            put!(&format!("{side}.{label}.psi"), m.psi);
            put!(&format!("{side}.{label}.theta"), m.theta);
            put!(&format!("{side}.{label}.phi"), m.phi);
            let samples: Vec<String> =
                m.profile.samples().iter().map(|(d, b)| format!("{d:?}:{b:?}")).collect();
            let _ = writeln!(out, "{side}.{label}.profile = ({})", samples.join(", "));
        }
    }
    out
}

/// SHA-256 of the canonical text, hex encoded.
pub fn geometry_hash(geom: &MachineGeometry) -> String {
    hex::encode(Sha256::digest(to_config_string(geom).as_bytes()))
}
