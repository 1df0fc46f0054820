//! Asset catalog: triangle meshes (ASCII OBJ subset with positions and
//! per-vertex normals), equirectangular HDRI maps (PFM), and backdrop
//! definitions. Also hosts the procedural generators used to build a
//! self-contained default catalog on disk.

use crate::codec;
use crate::img::{Raster, RgbF};
use crate::math::{vec3, Vec3};
use crate::rng::RngStream;
use crate::scene::{DiffuseAlbedo, Scene, SceneError};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AssetError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad catalog manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("malformed mesh {path}: {message}")]
    Mesh { path: PathBuf, message: String },
    #[error("bad hdri {id}: {message}")]
    Hdri { id: String, message: String },
    #[error("unknown {kind} key '{key}'")]
    UnknownKey { kind: &'static str, key: String },
}

// --- Triangle meshes ---------------------------------------------------

/// Indexed triangle mesh with one normal per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub positions: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = vec3(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for p in &self.positions {
            lo = lo.component_min(*p);
            hi = hi.component_max(*p);
        }
        (lo, hi)
    }

    /// Uniform-density volume centroid via signed tetrahedra against the
    /// origin. Falls back to the vertex mean for (near-)zero volume meshes
    /// such as open shells and flat plates.
    pub fn volume_centroid(&self) -> Vec3 {
        let mut volume = 0.0;
        let mut weighted = Vec3::ZERO;
        for t in &self.triangles {
            let (a, b, c) = (
                self.positions[t[0] as usize],
                self.positions[t[1] as usize],
                self.positions[t[2] as usize],
            );
            let v = a.dot(b.cross(c)) / 6.0;
            volume += v;
            weighted += (a + b + c) * (v / 4.0);
        }
        if volume.abs() < 1e-12 {
            let mut mean = Vec3::ZERO;
            for p in &self.positions {
                mean += *p;
            }
            mean / self.positions.len().max(1) as f64
        } else {
            weighted / volume
        }
    }
}

/// Parse the OBJ subset used by the catalog: `v`, `vn`, and `f` with
/// `pos//normal` or `pos/uv/normal` corners. Faces with more than three
/// corners are fan-triangulated.
pub fn parse_obj(text: &str, origin: &Path) -> Result<TriangleMesh, AssetError> {
    let err = |message: String| AssetError::Mesh { path: origin.to_path_buf(), message };
    let mut positions = Vec::new();
    let mut normals = Vec::new();
    // (position index, normal index) -> unified vertex index
    let mut vertex_ids: HashMap<(u32, u32), u32> = HashMap::new();
    let mut out = TriangleMesh { positions: vec![], normals: vec![], triangles: vec![] };

    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut p = [0.0; 3];
                for c in &mut p {
                    *c = tokens
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(format!("line {}: bad vertex", lineno + 1)))?;
                }
                positions.push(Vec3::from_array(p));
            }
            Some("vn") => {
                let mut n = [0.0; 3];
                for c in &mut n {
                    *c = tokens
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(format!("line {}: bad normal", lineno + 1)))?;
                }
                normals.push(Vec3::from_array(n));
            }
            Some("f") => {
                let mut corners = Vec::new();
                for tok in tokens {
                    let mut parts = tok.split('/');
                    let vi: u32 = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(format!("line {}: bad face corner", lineno + 1)))?;
                    // `v//vn` or `v/vt/vn`: the normal index comes last.
                    let ni: u32 = match (parts.next(), parts.next()) {
                        (Some(n), None) | (Some(_), Some(n)) if !n.is_empty() => n
                            .parse()
                            .map_err(|_| err(format!("line {}: bad normal index", lineno + 1)))?,
                        _ => {
                            return Err(err(format!(
                                "line {}: face corners need normal indices",
                                lineno + 1
                            )))
                        }
                    };
                    if vi == 0 || vi as usize > positions.len() || ni == 0 || ni as usize > normals.len()
                    {
                        return Err(err(format!("line {}: index out of range", lineno + 1)));
                    }
                    let id = *vertex_ids.entry((vi, ni)).or_insert_with(|| {
                        out.positions.push(positions[(vi - 1) as usize]);
                        out.normals.push(normals[(ni - 1) as usize]);
                        (out.positions.len() - 1) as u32
                    });
                    corners.push(id);
                }
                if corners.len() < 3 {
                    return Err(err(format!("line {}: face needs 3+ corners", lineno + 1)));
                }
                for k in 1..corners.len() - 1 {
                    out.triangles.push([corners[0], corners[k], corners[k + 1]]);
                }
            }
            // Ignore groups, objects, materials, smoothing hints.
            _ => {}
        }
    }
    if out.triangles.is_empty() {
        return Err(err("mesh has no faces".into()));
    }
    for p in &out.positions {
        if !p.is_finite() {
            return Err(err("non-finite vertex".into()));
        }
    }
    Ok(out)
}

pub fn write_obj(mesh: &TriangleMesh) -> String {
    let mut s = String::new();
    for p in &mesh.positions {
        s.push_str(&format!("v {} {} {}\n", p.x, p.y, p.z));
    }
    for n in &mesh.normals {
        s.push_str(&format!("vn {} {} {}\n", n.x, n.y, n.z));
    }
    for t in &mesh.triangles {
        s.push_str(&format!(
            "f {}//{} {}//{} {}//{}\n",
            t[0] + 1,
            t[0] + 1,
            t[1] + 1,
            t[1] + 1,
            t[2] + 1,
            t[2] + 1
        ));
    }
    s
}

// --- Procedural mesh builders -------------------------------------------

pub mod builtin {
    use super::TriangleMesh;
    use crate::math::{vec3, Vec3};
    use std::f64::consts::TAU;

    /// UV sphere centered at the origin with analytic vertex normals.
    pub fn uv_sphere(radius: f64, segments: u32, rings: u32) -> TriangleMesh {
        assert!(segments >= 3 && rings >= 2);
        let mut positions = Vec::new();
        let mut normals = Vec::new();
        // Rings from the north pole (excluded) to the south pole (excluded).
        for r in 1..rings {
            let theta = std::f64::consts::PI * r as f64 / rings as f64;
            for s in 0..segments {
                let phi = TAU * s as f64 / segments as f64;
                let n = vec3(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
                positions.push(n * radius);
                normals.push(n);
            }
        }
        let north = positions.len() as u32;
        positions.push(vec3(0.0, 0.0, radius));
        normals.push(Vec3::Z);
        let south = positions.len() as u32;
        positions.push(vec3(0.0, 0.0, -radius));
        normals.push(-Vec3::Z);

        let mut triangles = Vec::new();
        let ring = |r: u32, s: u32| r * segments + (s % segments);
        for s in 0..segments {
            triangles.push([north, ring(0, s), ring(0, s + 1)]);
            triangles.push([south, ring(rings - 2, s + 1), ring(rings - 2, s)]);
        }
        for r in 0..rings - 2 {
            for s in 0..segments {
                let (a, b, c, d) = (ring(r, s), ring(r, s + 1), ring(r + 1, s + 1), ring(r + 1, s));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        TriangleMesh { positions, normals, triangles }
    }

    /// Axis-aligned box centered at the origin, face normals.
    pub fn cuboid(half_x: f64, half_y: f64, half_z: f64) -> TriangleMesh {
        let mut mesh = TriangleMesh { positions: vec![], normals: vec![], triangles: vec![] };
        let h = vec3(half_x, half_y, half_z);
        // (normal, u axis, v axis) per face
        let faces = [
            (Vec3::X, Vec3::Y, Vec3::Z),
            (-Vec3::X, Vec3::Z, Vec3::Y),
            (Vec3::Y, Vec3::Z, Vec3::X),
            (-Vec3::Y, Vec3::X, Vec3::Z),
            (Vec3::Z, Vec3::X, Vec3::Y),
            (-Vec3::Z, Vec3::Y, Vec3::X),
        ];
        for (n, u, v) in faces {
            let base = mesh.positions.len() as u32;
            let center = vec3(n.x * h.x, n.y * h.y, n.z * h.z);
            let ue = vec3(u.x * h.x, u.y * h.y, u.z * h.z);
            let ve = vec3(v.x * h.x, v.y * h.y, v.z * h.z);
            for (su, sv) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
                mesh.positions.push(center + ue * su + ve * sv);
                mesh.normals.push(n);
            }
            mesh.triangles.push([base, base + 1, base + 2]);
            mesh.triangles.push([base, base + 2, base + 3]);
        }
        mesh
    }

    pub fn cube(half: f64) -> TriangleMesh {
        cuboid(half, half, half)
    }

    /// Closed cylinder along z, centered at the origin. Side normals are
    /// smooth; caps use face normals.
    pub fn cylinder(radius: f64, height: f64, segments: u32) -> TriangleMesh {
        assert!(segments >= 3);
        let hz = height / 2.0;
        let mut mesh = TriangleMesh { positions: vec![], normals: vec![], triangles: vec![] };
        // Side
        for s in 0..segments {
            let phi = TAU * s as f64 / segments as f64;
            let n = vec3(phi.cos(), phi.sin(), 0.0);
            mesh.positions.push(vec3(n.x * radius, n.y * radius, -hz));
            mesh.normals.push(n);
            mesh.positions.push(vec3(n.x * radius, n.y * radius, hz));
            mesh.normals.push(n);
        }
        for s in 0..segments {
            let a = 2 * s;
            let b = 2 * ((s + 1) % segments);
            mesh.triangles.push([a, b, b + 1]);
            mesh.triangles.push([a, b + 1, a + 1]);
        }
        // Caps
        for (z, n) in [(-hz, -Vec3::Z), (hz, Vec3::Z)] {
            let base = mesh.positions.len() as u32;
            mesh.positions.push(vec3(0.0, 0.0, z));
            mesh.normals.push(n);
            for s in 0..segments {
                let phi = TAU * s as f64 / segments as f64;
                mesh.positions.push(vec3(radius * phi.cos(), radius * phi.sin(), z));
                mesh.normals.push(n);
            }
            for s in 0..segments {
                let a = base + 1 + s;
                let b = base + 1 + (s + 1) % segments;
                if z < 0.0 {
                    mesh.triangles.push([base, b, a]);
                } else {
                    mesh.triangles.push([base, a, b]);
                }
            }
        }
        mesh
    }

    /// Right-angle wedge (triangular prism): right triangle in the xz plane
    /// extruded along y, centered on y. The vertical face sits at x = 0, the
    /// base at z = 0, and the hypotenuse slopes from (0, z_h) to (x_w, 0).
    pub fn wedge(width: f64, depth: f64, height: f64) -> TriangleMesh {
        let hy = depth / 2.0;
        let mut mesh = TriangleMesh { positions: vec![], normals: vec![], triangles: vec![] };
        let tri = [vec3(0.0, 0.0, 0.0), vec3(width, 0.0, 0.0), vec3(0.0, 0.0, height)];
        // End caps at y = -hy (normal -y) and y = +hy (normal +y)
        for (sy, n) in [(-hy, -Vec3::Y), (hy, Vec3::Y)] {
            let base = mesh.positions.len() as u32;
            for p in tri {
                mesh.positions.push(vec3(p.x, sy, p.z));
                mesh.normals.push(n);
            }
            if sy < 0.0 {
                mesh.triangles.push([base, base + 2, base + 1]);
            } else {
                mesh.triangles.push([base, base + 1, base + 2]);
            }
        }
        // Three rectangular sides: bottom (z = 0), vertical (x = 0), hypotenuse.
        let hyp_n = vec3(height, 0.0, width).normalized();
        let sides = [
            (vec3(0.0, 0.0, 0.0), vec3(width, 0.0, 0.0), -Vec3::Z),
            (vec3(0.0, 0.0, height), vec3(0.0, 0.0, 0.0), -Vec3::X),
            (vec3(width, 0.0, 0.0), vec3(0.0, 0.0, height), hyp_n),
        ];
        for (p0, p1, n) in sides {
            let base = mesh.positions.len() as u32;
            for p in [
                vec3(p0.x, -hy, p0.z),
                vec3(p1.x, -hy, p1.z),
                vec3(p1.x, hy, p1.z),
                vec3(p0.x, hy, p0.z),
            ] {
                mesh.positions.push(p);
                mesh.normals.push(n);
            }
            mesh.triangles.push([base, base + 1, base + 2]);
            mesh.triangles.push([base, base + 2, base + 3]);
        }
        mesh
    }

    /// Open drinking-glass shell: outer wall, inner wall, bottom, and rim.
    /// Sits with its base at z = -height/2 (centered like the cylinder).
    pub fn tumbler(outer_radius: f64, height: f64, wall: f64, segments: u32) -> TriangleMesh {
        assert!(wall < outer_radius && segments >= 3);
        let inner = outer_radius - wall;
        let hz = height / 2.0;
        let floor_z = -hz + wall;
        let mut mesh = TriangleMesh { positions: vec![], normals: vec![], triangles: vec![] };

        let mut ring = |radius: f64, z: f64, normal_radial: f64, normal_z: f64| -> u32 {
            let base = mesh.positions.len() as u32;
            for s in 0..segments {
                let phi = TAU * s as f64 / segments as f64;
                let dir = vec3(phi.cos(), phi.sin(), 0.0);
                mesh.positions.push(vec3(dir.x * radius, dir.y * radius, z));
                mesh.normals.push((dir * normal_radial + Vec3::Z * normal_z).normalized());
            }
            base
        };

        let outer_bottom = ring(outer_radius, -hz, 1.0, 0.0);
        let outer_top = ring(outer_radius, hz, 1.0, 0.0);
        let inner_top = ring(inner, hz, -1.0, 0.0);
        let inner_floor = ring(inner, floor_z, -1.0, 0.0);
        let rim_out = ring(outer_radius, hz, 0.0, 1.0);
        let rim_in = ring(inner, hz, 0.0, 1.0);
        let floor_ring = ring(inner, floor_z, 0.0, 1.0);
        let base_ring = ring(outer_radius, -hz, 0.0, -1.0);

        let quad = |mesh: &mut TriangleMesh, a: u32, b: u32, flip: bool| {
            for s in 0..segments {
                let s2 = (s + 1) % segments;
                let (p0, p1, p2, p3) = (a + s, a + s2, b + s2, b + s);
                if flip {
                    mesh.triangles.push([p0, p2, p1]);
                    mesh.triangles.push([p0, p3, p2]);
                } else {
                    mesh.triangles.push([p0, p1, p2]);
                    mesh.triangles.push([p0, p2, p3]);
                }
            }
        };
        quad(&mut mesh, outer_bottom, outer_top, false); // outer wall, normal out
        quad(&mut mesh, inner_floor, inner_top, true); // inner wall, normal in
        quad(&mut mesh, rim_out, rim_in, true); // rim annulus facing up
        // Inner floor disc (faces up) and outer base disc (faces down)
        for (ring_base, z, up) in [(floor_ring, floor_z, true), (base_ring, -hz, false)] {
            let center = mesh.positions.len() as u32;
            mesh.positions.push(vec3(0.0, 0.0, z));
            mesh.normals.push(if up { Vec3::Z } else { -Vec3::Z });
            for s in 0..segments {
                let s2 = (s + 1) % segments;
                if up {
                    mesh.triangles.push([center, ring_base + s, ring_base + s2]);
                } else {
                    mesh.triangles.push([center, ring_base + s2, ring_base + s]);
                }
            }
        }
        mesh
    }

    /// Square floor plate in the z = 0 plane, normals up.
    pub fn floor_plate(half_size: f64) -> TriangleMesh {
        let mut mesh = TriangleMesh { positions: vec![], normals: vec![], triangles: vec![] };
        for (x, y) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
            mesh.positions.push(vec3(x * half_size, y * half_size, 0.0));
            mesh.normals.push(Vec3::Z);
        }
        mesh.triangles.push([0, 1, 2]);
        mesh.triangles.push([0, 2, 3]);
        mesh
    }

    /// Floor plate plus a vertical back wall along +y, facing the origin.
    pub fn floor_with_wall(half_size: f64, wall_height: f64) -> TriangleMesh {
        let mut mesh = floor_plate(half_size);
        let base = mesh.positions.len() as u32;
        for (x, z) in [(-1.0, 0.0), (1.0, 0.0), (1.0, 1.0), (-1.0, 1.0)] {
            mesh.positions.push(vec3(x * half_size, half_size, z * wall_height));
            mesh.normals.push(-Vec3::Y);
        }
        mesh.triangles.push([base, base + 2, base + 1]);
        mesh.triangles.push([base, base + 3, base + 2]);
        mesh
    }
}

// --- HDRI generation ------------------------------------------------------

/// Resolved environment map: equirectangular linear RGB with +z at v = 0.
#[derive(Debug, Clone)]
pub struct EnvironmentMap {
    pub id: String,
    pub raster: Arc<RgbF>,
    pub rotation_deg: f64,
}

impl EnvironmentMap {
    /// Sample by direction with bilinear filtering and horizontal wrap.
    pub fn sample(&self, dir: Vec3) -> [f64; 3] {
        let d = dir.normalized_or_z();
        let rot = self.rotation_deg.to_radians();
        let phi = d.y.atan2(d.x) - rot;
        let theta = d.z.clamp(-1.0, 1.0).acos();
        let w = self.raster.width() as f64;
        let h = self.raster.height() as f64;
        let u = (phi / std::f64::consts::TAU).rem_euclid(1.0) * w - 0.5;
        let v = (theta / std::f64::consts::PI) * h - 0.5;
        let (x0, y0) = (u.floor(), v.floor());
        let (fx, fy) = (u - x0, v - y0);
        let mut acc = [0.0f64; 3];
        for (dx, dy, wgt) in [
            (0.0, 0.0, (1.0 - fx) * (1.0 - fy)),
            (1.0, 0.0, fx * (1.0 - fy)),
            (0.0, 1.0, (1.0 - fx) * fy),
            (1.0, 1.0, fx * fy),
        ] {
            let xi = ((x0 + dx) as i64).rem_euclid(self.raster.width() as i64) as u32;
            let yi = ((y0 + dy) as i64).clamp(0, self.raster.height() as i64 - 1) as u32;
            let t = self.raster.get(xi, yi);
            for c in 0..3 {
                acc[c] += t[c] as f64 * wgt;
            }
        }
        acc
    }
}

/// Deterministic sky gradient for a bank slot: zenith/horizon/ground colors
/// plus an optional sun disc, all derived from the index.
pub fn generate_sky(index: u64, width: u32, height: u32) -> RgbF {
    let mut s = RngStream::new(0x5EED_5EED, "hdri-bank", index);
    let zenith = [s.range_f64(0.2, 0.7), s.range_f64(0.3, 0.8), s.range_f64(0.6, 1.2)];
    let horizon = [s.range_f64(0.6, 1.2), s.range_f64(0.5, 1.0), s.range_f64(0.4, 0.9)];
    let ground = [s.range_f64(0.05, 0.3), s.range_f64(0.05, 0.3), s.range_f64(0.05, 0.25)];
    let sun_phi = s.range_f64(0.0, std::f64::consts::TAU);
    let sun_theta = s.range_f64(0.2, 1.1);
    let sun_power = s.range_f64(2.0, 8.0);
    let sun_dir = vec3(
        sun_theta.sin() * sun_phi.cos(),
        sun_theta.sin() * sun_phi.sin(),
        sun_theta.cos(),
    );

    let mut raster = Raster::filled(width, height, [0f32; 3]);
    for y in 0..height {
        let theta = std::f64::consts::PI * (y as f64 + 0.5) / height as f64;
        for x in 0..width {
            let phi = std::f64::consts::TAU * (x as f64 + 0.5) / width as f64;
            let dir = vec3(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
            let t = dir.z; // 1 at zenith, -1 at nadir
            let mut col = [0.0f64; 3];
            for c in 0..3 {
                col[c] = if t >= 0.0 {
                    horizon[c] + (zenith[c] - horizon[c]) * t
                } else {
                    horizon[c] + (ground[c] - horizon[c]) * (-t)
                };
            }
            let cos_sun = dir.dot(sun_dir);
            if cos_sun > 0.995 {
                let glow = ((cos_sun - 0.995) / 0.005).powi(2) * sun_power;
                for c in &mut col {
                    *c += glow;
                }
            }
            raster.set(x, y, [col[0] as f32, col[1] as f32, col[2] as f32]);
        }
    }
    raster
}

// --- Catalog ---------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackdropDef {
    pub mesh: String,
    pub albedo: DiffuseAlbedo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogManifest {
    pub generator_version: String,
    /// Mesh key -> path relative to the catalog root.
    pub meshes: BTreeMap<String, String>,
    /// HDRI key -> relative path of a color PFM.
    pub hdri: BTreeMap<String, String>,
    /// Backdrop bank: key -> mesh + material.
    pub backdrops: BTreeMap<String, BackdropDef>,
}

pub struct AssetCatalog {
    root: PathBuf,
    manifest: CatalogManifest,
    mesh_cache: Mutex<HashMap<String, Arc<TriangleMesh>>>,
    hdri_cache: Mutex<HashMap<String, Arc<RgbF>>>,
}

impl AssetCatalog {
    pub fn open(root: &Path) -> Result<AssetCatalog, AssetError> {
        let manifest_path = root.join("catalog.toml");
        let text = fs::read_to_string(&manifest_path)
            .map_err(|e| AssetError::Io { path: manifest_path.clone(), source: e })?;
        let manifest: CatalogManifest = toml::from_str(&text)
            .map_err(|e| AssetError::Manifest { path: manifest_path, message: e.to_string() })?;
        Ok(AssetCatalog {
            root: root.to_path_buf(),
            manifest,
            mesh_cache: Mutex::new(HashMap::new()),
            hdri_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &CatalogManifest {
        &self.manifest
    }

    pub fn has_mesh(&self, key: &str) -> bool {
        self.manifest.meshes.contains_key(key)
    }

    pub fn has_hdri(&self, key: &str) -> bool {
        self.manifest.hdri.contains_key(key)
    }

    pub fn backdrop(&self, key: &str) -> Result<&BackdropDef, AssetError> {
        self.manifest
            .backdrops
            .get(key)
            .ok_or_else(|| AssetError::UnknownKey { kind: "backdrop", key: key.into() })
    }

    pub fn mesh(&self, key: &str) -> Result<Arc<TriangleMesh>, AssetError> {
        if let Some(m) = self.mesh_cache.lock().unwrap().get(key) {
            return Ok(m.clone());
        }
        let rel = self
            .manifest
            .meshes
            .get(key)
            .ok_or_else(|| AssetError::UnknownKey { kind: "mesh", key: key.into() })?;
        let path = self.root.join(rel);
        let text =
            fs::read_to_string(&path).map_err(|e| AssetError::Io { path: path.clone(), source: e })?;
        let mesh = Arc::new(parse_obj(&text, &path)?);
        self.mesh_cache.lock().unwrap().insert(key.to_string(), mesh.clone());
        Ok(mesh)
    }

    pub fn hdri(&self, key: &str, rotation_deg: f64) -> Result<EnvironmentMap, AssetError> {
        let cached = self.hdri_cache.lock().unwrap().get(key).cloned();
        let raster = match cached {
            Some(r) => r,
            None => {
                let rel = self
                    .manifest
                    .hdri
                    .get(key)
                    .ok_or_else(|| AssetError::UnknownKey { kind: "hdri", key: key.into() })?;
                let path = self.root.join(rel);
                let bytes =
                    fs::read(&path).map_err(|e| AssetError::Io { path: path.clone(), source: e })?;
                let raster = codec::decode_pfm_rgb(&bytes)
                    .map_err(|e| AssetError::Hdri { id: key.into(), message: e.to_string() })?;
                for (x, y, t) in raster.pixels() {
                    if !(t[0].is_finite() && t[1].is_finite() && t[2].is_finite())
                        || t[0] < 0.0
                        || t[1] < 0.0
                        || t[2] < 0.0
                    {
                        return Err(AssetError::Hdri {
                            id: key.into(),
                            message: format!("texel ({x}, {y}) not finite and >= 0"),
                        });
                    }
                }
                let raster = Arc::new(raster);
                self.hdri_cache.lock().unwrap().insert(key.to_string(), raster.clone());
                raster
            }
        };
        Ok(EnvironmentMap { id: key.to_string(), raster, rotation_deg })
    }

    /// Every mesh and HDRI reference in the scene must resolve.
    pub fn check_scene_assets(&self, scene: &Scene) -> Result<(), SceneError> {
        for inst in scene.all_instances() {
            if !self.has_mesh(&inst.mesh) {
                return Err(SceneError::MissingAsset { kind: "mesh", id: inst.mesh.clone() });
            }
        }
        if !self.has_hdri(&scene.environment().id) {
            return Err(SceneError::MissingAsset {
                kind: "hdri",
                id: scene.environment().id.clone(),
            });
        }
        Ok(())
    }
}

// --- Default catalog generation ---------------------------------------------

fn prop_palette(index: u64) -> [f64; 3] {
    let mut s = RngStream::new(0xA11E_D0, "prop-palette", index);
    [s.range_f64(0.15, 0.85), s.range_f64(0.15, 0.85), s.range_f64(0.15, 0.85)]
}

/// Write a complete self-contained catalog: object and prop meshes, a
/// configurable number of backdrop and HDRI bank entries, and the manifest.
pub fn write_default_catalog(
    root: &Path,
    hdri_count: u32,
    backdrop_count: u32,
) -> Result<CatalogManifest, AssetError> {
    let io_err = |path: &Path| {
        let p = path.to_path_buf();
        move |e: std::io::Error| AssetError::Io { path: p.clone(), source: e }
    };
    fs::create_dir_all(root.join("meshes")).map_err(io_err(root))?;
    fs::create_dir_all(root.join("hdri")).map_err(io_err(root))?;

    let meshes: Vec<(&str, TriangleMesh)> = vec![
        ("sphere", builtin::uv_sphere(0.05, 48, 24)),
        ("cube", builtin::cube(0.04)),
        ("cylinder", builtin::cylinder(0.035, 0.1, 48)),
        ("wedge", builtin::wedge(0.08, 0.08, 0.06)),
        ("tumbler", builtin::tumbler(0.04, 0.1, 0.005, 40)),
        ("prop_cube", builtin::cuboid(0.05, 0.04, 0.03)),
        ("prop_sphere", builtin::uv_sphere(0.03, 32, 16)),
        ("prop_cylinder", builtin::cylinder(0.025, 0.07, 32)),
        ("floor", builtin::floor_plate(3.0)),
        ("floor_wall", builtin::floor_with_wall(3.0, 1.5)),
    ];

    let mut manifest = CatalogManifest {
        generator_version: env!("CARGO_PKG_VERSION").to_string(),
        meshes: BTreeMap::new(),
        hdri: BTreeMap::new(),
        backdrops: BTreeMap::new(),
    };

    for (key, mesh) in &meshes {
        let rel = format!("meshes/{key}.obj");
        let path = root.join(&rel);
        fs::write(&path, write_obj(mesh)).map_err(io_err(&path))?;
        manifest.meshes.insert(key.to_string(), rel);
    }

    for i in 0..hdri_count {
        let key = format!("sky_{i:02}");
        let rel = format!("hdri/{key}.pfm");
        let path = root.join(&rel);
        fs::write(&path, codec::encode_pfm_rgb(&generate_sky(i as u64, 64, 32)))
            .map_err(io_err(&path))?;
        manifest.hdri.insert(key, rel);
    }

    for i in 0..backdrop_count {
        let key = format!("backdrop_{i:02}");
        let mesh = if i % 2 == 0 { "floor" } else { "floor_wall" };
        let albedo = if i % 3 == 2 {
            DiffuseAlbedo::Checker {
                a: prop_palette(1000 + i as u64),
                b: prop_palette(2000 + i as u64),
                scale_m: 0.12,
            }
        } else {
            DiffuseAlbedo::Solid { rgb: prop_palette(3000 + i as u64) }
        };
        manifest
            .backdrops
            .insert(key, BackdropDef { mesh: mesh.to_string(), albedo });
    }

    let manifest_path = root.join("catalog.toml");
    let text = crate::scene::to_canonical_toml(&manifest)
        .map_err(|e| AssetError::Manifest { path: manifest_path.clone(), message: e.to_string() })?;
    fs::write(&manifest_path, text).map_err(io_err(&manifest_path))?;
    Ok(manifest)
}

/// Small catalog for unit tests: coarse meshes, two bank entries each.
pub fn write_test_catalog(root: &Path) -> Result<CatalogManifest, AssetError> {
    let io_err = |path: &Path| {
        let p = path.to_path_buf();
        move |e: std::io::Error| AssetError::Io { path: p.clone(), source: e }
    };
    fs::create_dir_all(root.join("meshes")).map_err(io_err(root))?;
    fs::create_dir_all(root.join("hdri")).map_err(io_err(root))?;

    let meshes: Vec<(&str, TriangleMesh)> = vec![
        ("sphere", builtin::uv_sphere(0.05, 24, 12)),
        ("cube", builtin::cube(0.04)),
        ("wedge", builtin::wedge(0.08, 0.08, 0.06)),
        ("prop_cube", builtin::cuboid(0.05, 0.04, 0.03)),
        ("floor", builtin::floor_plate(3.0)),
    ];
    let mut manifest = CatalogManifest {
        generator_version: env!("CARGO_PKG_VERSION").to_string(),
        meshes: BTreeMap::new(),
        hdri: BTreeMap::new(),
        backdrops: BTreeMap::new(),
    };
    for (key, mesh) in &meshes {
        let rel = format!("meshes/{key}.obj");
        fs::write(root.join(&rel), write_obj(mesh)).map_err(io_err(root))?;
        manifest.meshes.insert(key.to_string(), rel);
    }
    for i in 0..2u32 {
        let key = format!("sky_{i:02}");
        let rel = format!("hdri/{key}.pfm");
        fs::write(root.join(&rel), codec::encode_pfm_rgb(&generate_sky(i as u64, 16, 8)))
            .map_err(io_err(root))?;
        manifest.hdri.insert(key, rel);
    }
    manifest.backdrops.insert(
        "backdrop_00".into(),
        BackdropDef { mesh: "floor".into(), albedo: DiffuseAlbedo::Solid { rgb: [0.5, 0.5, 0.5] } },
    );
    manifest.backdrops.insert(
        "backdrop_01".into(),
        BackdropDef {
            mesh: "floor".into(),
            albedo: DiffuseAlbedo::Checker { a: [0.7, 0.7, 0.7], b: [0.25, 0.25, 0.25], scale_m: 0.12 },
        },
    );
    let text = crate::scene::to_canonical_toml(&manifest)
        .map_err(|e| AssetError::Manifest { path: root.join("catalog.toml"), message: e.to_string() })?;
    fs::write(root.join("catalog.toml"), text).map_err(io_err(root))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obj_round_trip_preserves_geometry() {
        let mesh = builtin::uv_sphere(0.05, 12, 6);
        let text = write_obj(&mesh);
        let parsed = parse_obj(&text, Path::new("mem")).unwrap();
        assert_eq!(parsed.triangles.len(), mesh.triangles.len());
        assert_eq!(parsed.positions.len(), mesh.positions.len());
        for (a, b) in mesh.positions.iter().zip(&parsed.positions) {
            assert!((*a - *b).length() < 1e-12);
        }
    }

    #[test]
    fn obj_quad_faces_triangulate() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\n";
        let mesh = parse_obj(text, Path::new("mem")).unwrap();
        assert_eq!(mesh.triangles.len(), 2);
    }

    #[test]
    fn obj_rejects_missing_normals() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nf 1 2 3\n";
        assert!(parse_obj(text, Path::new("mem")).is_err());
    }

    #[test]
    fn sphere_vertices_on_radius() {
        let mesh = builtin::uv_sphere(0.05, 24, 12);
        for p in &mesh.positions {
            assert!((p.length() - 0.05).abs() < 1e-12);
        }
        let c = mesh.volume_centroid();
        assert!(c.length() < 1e-9);
    }

    #[test]
    fn cube_centroid_at_origin_and_closed() {
        let mesh = builtin::cube(0.04);
        assert_eq!(mesh.triangles.len(), 12);
        assert!(mesh.volume_centroid().length() < 1e-12);
        // Volume of the closed cube should be (2*0.04)^3.
        let mut vol = 0.0;
        for t in &mesh.triangles {
            let (a, b, c) = (
                mesh.positions[t[0] as usize],
                mesh.positions[t[1] as usize],
                mesh.positions[t[2] as usize],
            );
            vol += a.dot(b.cross(c)) / 6.0;
        }
        assert!((vol - 0.08f64.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn tumbler_is_watertight_enough_for_volume() {
        let mesh = builtin::tumbler(0.04, 0.1, 0.005, 24);
        let mut vol = 0.0;
        for t in &mesh.triangles {
            let (a, b, c) = (
                mesh.positions[t[0] as usize],
                mesh.positions[t[1] as usize],
                mesh.positions[t[2] as usize],
            );
            vol += a.dot(b.cross(c)) / 6.0;
        }
        // Shell volume: outer cylinder minus the cavity.
        let outer = std::f64::consts::PI * 0.04f64.powi(2) * 0.1;
        let cavity = std::f64::consts::PI * 0.035f64.powi(2) * 0.095;
        // Coarse tessellation underestimates; allow 10%.
        assert!((vol - (outer - cavity)).abs() < 0.1 * (outer - cavity), "vol {vol}");
    }

    #[test]
    fn catalog_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let written = write_test_catalog(dir.path()).unwrap();
        let catalog = AssetCatalog::open(dir.path()).unwrap();
        assert_eq!(catalog.manifest(), &written);
        let sphere = catalog.mesh("sphere").unwrap();
        assert!(!sphere.triangles.is_empty());
        assert!(catalog.mesh("nope").is_err());
        let env = catalog.hdri("sky_00", 0.0).unwrap();
        let s = env.sample(vec3(0.0, 0.0, 1.0));
        assert!(s.iter().all(|c| c.is_finite() && *c >= 0.0));
    }

    #[test]
    fn hdri_uniform_sampling_is_flat() {
        let raster = Raster::filled(8, 4, [0.75f32, 0.5, 0.25]);
        let env = EnvironmentMap { id: "u".into(), raster: Arc::new(raster), rotation_deg: 33.0 };
        for dir in [vec3(1.0, 0.0, 0.0), vec3(0.0, 0.0, 1.0), vec3(-0.3, 0.8, -0.5).normalized()] {
            let s = env.sample(dir);
            assert!((s[0] - 0.75).abs() < 1e-6);
            assert!((s[1] - 0.5).abs() < 1e-6);
            assert!((s[2] - 0.25).abs() < 1e-6);
        }
    }
}
