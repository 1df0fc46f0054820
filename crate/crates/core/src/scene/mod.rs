//! Canonical scene representation. A [`Scene`] can only be obtained through
//! [`Scene::new`], which canonicalizes (objects sorted by id) and validates
//! every invariant, so code downstream never sees an invalid scene.

mod io;

pub use io::{load_scene, save_scene, to_canonical_toml};

use crate::math::{Quat, Transform, Vec3};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("validation error at {field}: {message}")]
    Validation { field: String, message: String },
    #[error("missing {kind} asset '{id}'")]
    MissingAsset { kind: &'static str, id: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("serialization failed: {0}")]
    Serialize(String),
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> SceneError {
    SceneError::Validation { field: field.into(), message: message.into() }
}

/// TOML integers are signed 64-bit, so 64-bit seeds travel as decimal
/// strings in every file format of this toolkit.
pub mod u64_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse::<u64>().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemanticClass {
    Transparent,
    Prop,
    Backdrop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThicknessMode {
    Solid,
    ThinWalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlassMaterial {
    /// Index of refraction at the green band.
    pub base_ior: f64,
    /// Absent means no dispersion (all bands share `base_ior`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abbe_number: Option<f64>,
    pub roughness: f64,
    /// Linear RGB multiplier applied once per transmission event.
    pub tint: [f64; 3],
    pub specular_scale: f64,
    pub thickness_mode: ThicknessMode,
}

impl Default for GlassMaterial {
    fn default() -> Self {
        GlassMaterial {
            base_ior: 1.5,
            abbe_number: Some(30.0),
            roughness: 0.0,
            tint: [1.0, 1.0, 1.0],
            specular_scale: 1.0,
            thickness_mode: ThicknessMode::Solid,
        }
    }
}

impl GlassMaterial {
    /// Per-band IORs (red, green, blue). Without an Abbe number all bands
    /// share `base_ior`.
    pub fn band_iors(&self) -> (f64, f64, f64) {
        match self.abbe_number {
            None => (self.base_ior, self.base_ior, self.base_ior),
            // Validated at scene construction; fall back to no dispersion
            // rather than panicking on a degenerate value.
            Some(v) => dispersion_band_iors(self.base_ior, v)
                .unwrap_or((self.base_ior, self.base_ior, self.base_ior)),
        }
    }
}

/// Spread the base (green) IOR into RGB band IORs from the Abbe number.
/// The total spread is `(base_ior - 1) / abbe_number`, split symmetrically:
/// red low, blue high.
pub fn dispersion_band_iors(base_ior: f64, abbe_number: f64) -> Result<(f64, f64, f64), SceneError> {
    if !(base_ior > 1.0) || !base_ior.is_finite() {
        return Err(SceneError::Domain(format!("base_ior must be > 1, got {base_ior}")));
    }
    if !(abbe_number > 0.0) {
        return Err(SceneError::Domain(format!(
            "abbe_number must be positive, got {abbe_number}"
        )));
    }
    let spread = (base_ior - 1.0) / abbe_number;
    Ok((base_ior - spread / 2.0, base_ior, base_ior + spread / 2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiffuseAlbedo {
    Solid { rgb: [f64; 3] },
    /// World-anchored xy checkerboard; needs no UV coordinates.
    Checker { a: [f64; 3], b: [f64; 3], scale_m: f64 },
}

impl DiffuseAlbedo {
    pub fn sample(&self, world: Vec3) -> [f64; 3] {
        match self {
            DiffuseAlbedo::Solid { rgb } => *rgb,
            DiffuseAlbedo::Checker { a, b, scale_m } => {
                let u = (world.x / scale_m).floor() as i64;
                let v = (world.y / scale_m).floor() as i64;
                if (u + v).rem_euclid(2) == 0 {
                    *a
                } else {
                    *b
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffuseMaterial {
    pub albedo: DiffuseAlbedo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MaterialRef {
    Glass(GlassMaterial),
    Diffuse(DiffuseMaterial),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectInstance {
    pub object_id: u32,
    /// Mesh key in the asset catalog.
    pub mesh: String,
    pub transform: Transform,
    pub material: MaterialRef,
    pub semantic_class: SemanticClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaLight {
    pub center: Vec3,
    /// Disc radius in meters; 0 collapses to a point light.
    pub radius: f64,
    pub direction: Vec3,
    /// Emission cone half angle in radians, in (0, pi/2].
    pub cone_half_angle: f64,
    /// Linear RGB intensity scale (W/sr-like, unitless).
    pub radiant_intensity: [f64; 3],
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentRef {
    /// HDRI key in the asset catalog.
    pub id: String,
    pub rotation_deg: f64,
}

/// Rigid camera pose: camera space is right-handed, x right, y up,
/// looking along -z; `rotation` maps camera space into world space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose {
    pub translation: Vec3,
    pub rotation: Quat,
}

impl Pose {
    pub fn look_at(eye: Vec3, target: Vec3, up: Vec3) -> Pose {
        let back = (eye - target).normalized();
        let right = up.cross(back).normalized_or_z();
        let true_up = back.cross(right);
        Pose { translation: eye, rotation: Quat::from_basis(right, true_up, back) }
    }

    pub fn forward(&self) -> Vec3 {
        self.rotation.rotate(crate::math::vec3(0.0, 0.0, -1.0))
    }
}

fn default_width() -> u32 {
    1920
}

fn default_height() -> u32 {
    1080
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Camera {
    pub pose: Pose,
    #[serde(default = "default_width")]
    pub width: u32,
    #[serde(default = "default_height")]
    pub height: u32,
    /// Vertical field of view in radians.
    pub vertical_fov: f64,
    #[serde(default)]
    pub exposure_ev: f64,
}

fn default_depth_range() -> f64 {
    10.0
}

/// Raw scene fields as they appear on disk. Construct a [`Scene`] from this
/// with [`Scene::new`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneData {
    #[serde(with = "u64_string")]
    pub seed: u64,
    #[serde(default = "default_depth_range")]
    pub depth_range_m: f64,
    pub environment: EnvironmentRef,
    pub backdrop: ObjectInstance,
    #[serde(default)]
    pub objects: Vec<ObjectInstance>,
    #[serde(default)]
    pub props: Vec<ObjectInstance>,
    #[serde(default)]
    pub lights: Vec<AreaLight>,
    #[serde(default)]
    pub cameras: Vec<Camera>,
}

/// A validated, canonicalized scene. Immutable after construction; derive
/// modified scenes by building new [`SceneData`] (see the ablation module).
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    data: SceneData,
}

impl Scene {
    pub fn new(mut data: SceneData) -> Result<Scene, SceneError> {
        // Canonical order: instance lists sorted by object id.
        data.objects.sort_by_key(|o| o.object_id);
        data.props.sort_by_key(|o| o.object_id);
        validate(&data)?;
        Ok(Scene { data })
    }

    pub fn seed(&self) -> u64 {
        self.data.seed
    }

    pub fn depth_range_m(&self) -> f64 {
        self.data.depth_range_m
    }

    pub fn environment(&self) -> &EnvironmentRef {
        &self.data.environment
    }

    pub fn backdrop(&self) -> &ObjectInstance {
        &self.data.backdrop
    }

    pub fn objects(&self) -> &[ObjectInstance] {
        &self.data.objects
    }

    pub fn props(&self) -> &[ObjectInstance] {
        &self.data.props
    }

    pub fn lights(&self) -> &[AreaLight] {
        &self.data.lights
    }

    pub fn cameras(&self) -> &[Camera] {
        &self.data.cameras
    }

    pub fn data(&self) -> &SceneData {
        &self.data
    }

    /// Backdrop first, then objects, then props.
    pub fn all_instances(&self) -> impl Iterator<Item = &ObjectInstance> {
        std::iter::once(&self.data.backdrop)
            .chain(self.data.objects.iter())
            .chain(self.data.props.iter())
    }

    pub fn instance_by_id(&self, object_id: u32) -> Option<&ObjectInstance> {
        self.all_instances().find(|o| o.object_id == object_id)
    }

    pub fn class_of(&self, object_id: u32) -> Option<SemanticClass> {
        self.instance_by_id(object_id).map(|o| o.semantic_class)
    }
}

const UNIT_TOL: f64 = 1e-6;

fn check_rgb(field: &str, rgb: [f64; 3]) -> Result<(), SceneError> {
    for (i, c) in rgb.iter().enumerate() {
        if !c.is_finite() || *c < 0.0 || *c > 1.0 {
            return Err(invalid(format!("{field}[{i}]"), format!("component {c} outside [0, 1]")));
        }
    }
    Ok(())
}

fn check_instance(field: &str, inst: &ObjectInstance, expected: SemanticClass) -> Result<(), SceneError> {
    if inst.object_id == 0 {
        return Err(invalid(format!("{field}.object_id"), "object_id 0 is reserved for no-hit"));
    }
    if inst.object_id > u16::MAX as u32 {
        return Err(invalid(
            format!("{field}.object_id"),
            "object_id must fit the 16-bit mask encoding",
        ));
    }
    if inst.mesh.is_empty() {
        return Err(invalid(format!("{field}.mesh"), "empty mesh reference"));
    }
    let t = &inst.transform;
    if !t.translation.is_finite() {
        return Err(invalid(format!("{field}.transform.translation"), "non-finite translation"));
    }
    if !t.rotation.is_finite() || (t.rotation.norm() - 1.0).abs() > UNIT_TOL {
        return Err(invalid(
            format!("{field}.transform.rotation"),
            "rotation quaternion must have unit norm within 1e-6",
        ));
    }
    if !(t.scale > 0.0) || !t.scale.is_finite() {
        return Err(invalid(format!("{field}.transform.scale"), "scale must be positive"));
    }
    if inst.semantic_class != expected {
        return Err(invalid(
            format!("{field}.semantic_class"),
            format!("expected {expected:?} here"),
        ));
    }
    match (&inst.material, inst.semantic_class) {
        (MaterialRef::Glass(g), SemanticClass::Transparent) => {
            if !(g.base_ior > 1.0) || !g.base_ior.is_finite() {
                return Err(invalid(format!("{field}.material.base_ior"), "must be > 1"));
            }
            if let Some(v) = g.abbe_number {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(invalid(format!("{field}.material.abbe_number"), "must be positive"));
                }
            }
            if !(0.0..=1.0).contains(&g.roughness) {
                return Err(invalid(format!("{field}.material.roughness"), "must be in [0, 1]"));
            }
            check_rgb(&format!("{field}.material.tint"), g.tint)?;
            if !(0.0..=1.0).contains(&g.specular_scale) {
                return Err(invalid(format!("{field}.material.specular_scale"), "must be in [0, 1]"));
            }
        }
        (MaterialRef::Diffuse(d), SemanticClass::Prop | SemanticClass::Backdrop) => {
            match &d.albedo {
                DiffuseAlbedo::Solid { rgb } => check_rgb(&format!("{field}.material.albedo"), *rgb)?,
                DiffuseAlbedo::Checker { a, b, scale_m } => {
                    check_rgb(&format!("{field}.material.albedo.a"), *a)?;
                    check_rgb(&format!("{field}.material.albedo.b"), *b)?;
                    if !(*scale_m > 0.0) {
                        return Err(invalid(
                            format!("{field}.material.albedo.scale_m"),
                            "must be positive",
                        ));
                    }
                }
            }
        }
        (MaterialRef::Glass(_), _) => {
            return Err(invalid(format!("{field}.material"), "glass material requires transparent class"));
        }
        (MaterialRef::Diffuse(_), SemanticClass::Transparent) => {
            return Err(invalid(format!("{field}.material"), "transparent objects require glass material"));
        }
    }
    Ok(())
}

fn validate(data: &SceneData) -> Result<(), SceneError> {
    if !(data.depth_range_m > 0.0) || !data.depth_range_m.is_finite() {
        return Err(invalid("depth_range_m", "must be positive"));
    }
    if data.environment.id.is_empty() {
        return Err(invalid("environment.id", "empty catalog key"));
    }
    if !data.environment.rotation_deg.is_finite() {
        return Err(invalid("environment.rotation_deg", "must be finite"));
    }

    check_instance("backdrop", &data.backdrop, SemanticClass::Backdrop)?;
    for (i, o) in data.objects.iter().enumerate() {
        check_instance(&format!("objects[{i}]"), o, SemanticClass::Transparent)?;
    }
    for (i, p) in data.props.iter().enumerate() {
        check_instance(&format!("props[{i}]"), p, SemanticClass::Prop)?;
    }

    let mut seen = BTreeSet::new();
    for inst in std::iter::once(&data.backdrop).chain(&data.objects).chain(&data.props) {
        if !seen.insert(inst.object_id) {
            return Err(invalid("object_id", format!("duplicate object_id {}", inst.object_id)));
        }
    }

    for (i, l) in data.lights.iter().enumerate() {
        if !(l.radius >= 0.0) || !l.radius.is_finite() {
            return Err(invalid(format!("lights[{i}].radius"), "must be >= 0"));
        }
        if !l.center.is_finite() {
            return Err(invalid(format!("lights[{i}].center"), "must be finite"));
        }
        if (l.direction.length() - 1.0).abs() > UNIT_TOL {
            return Err(invalid(format!("lights[{i}].direction"), "must be a unit vector"));
        }
        if !(l.cone_half_angle > 0.0 && l.cone_half_angle <= std::f64::consts::FRAC_PI_2) {
            return Err(invalid(format!("lights[{i}].cone_half_angle"), "must be in (0, pi/2]"));
        }
        for (c, v) in l.radiant_intensity.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(invalid(
                    format!("lights[{i}].radiant_intensity[{c}]"),
                    "must be finite and >= 0",
                ));
            }
        }
    }

    for (i, c) in data.cameras.iter().enumerate() {
        if c.width < 1 || c.height < 1 {
            return Err(invalid(format!("cameras[{i}]"), "width and height must be >= 1"));
        }
        if !(c.vertical_fov > 0.0 && c.vertical_fov < std::f64::consts::PI) {
            return Err(invalid(format!("cameras[{i}].vertical_fov"), "must be in (0, pi)"));
        }
        if !c.pose.translation.is_finite()
            || !c.pose.rotation.is_finite()
            || (c.pose.rotation.norm() - 1.0).abs() > UNIT_TOL
        {
            return Err(invalid(format!("cameras[{i}].pose"), "must be finite with unit rotation"));
        }
        if !c.exposure_ev.is_finite() {
            return Err(invalid(format!("cameras[{i}].exposure_ev"), "must be finite"));
        }
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod test_fixtures {
    use super::*;
    use crate::math::vec3;

    pub fn diffuse_gray() -> MaterialRef {
        MaterialRef::Diffuse(DiffuseMaterial {
            albedo: DiffuseAlbedo::Solid { rgb: [0.5, 0.5, 0.5] },
        })
    }

    pub fn backdrop_instance(object_id: u32) -> ObjectInstance {
        ObjectInstance {
            object_id,
            mesh: "floor".into(),
            transform: Transform::IDENTITY,
            material: diffuse_gray(),
            semantic_class: SemanticClass::Backdrop,
        }
    }

    pub fn glass_object(object_id: u32, mesh: &str, translation: Vec3) -> ObjectInstance {
        ObjectInstance {
            object_id,
            mesh: mesh.into(),
            transform: Transform::new(translation, Quat::IDENTITY, 1.0),
            material: MaterialRef::Glass(GlassMaterial::default()),
            semantic_class: SemanticClass::Transparent,
        }
    }

    pub fn default_light() -> AreaLight {
        AreaLight {
            center: vec3(0.0, 0.0, 2.0),
            radius: 0.0,
            direction: vec3(0.0, 0.0, -1.0),
            cone_half_angle: std::f64::consts::FRAC_PI_2,
            radiant_intensity: [30.0, 30.0, 30.0],
            enabled: true,
        }
    }

    pub fn overhead_camera(width: u32, height: u32) -> Camera {
        Camera {
            pose: Pose::look_at(vec3(0.0, 0.0, 2.0), Vec3::ZERO, vec3(0.0, 1.0, 0.0)),
            width,
            height,
            vertical_fov: 0.9,
            exposure_ev: 0.0,
        }
    }

    pub fn minimal_scene_data(seed: u64) -> SceneData {
        SceneData {
            seed,
            depth_range_m: 10.0,
            environment: EnvironmentRef { id: "sky_00".into(), rotation_deg: 0.0 },
            backdrop: backdrop_instance(1),
            objects: vec![],
            props: vec![],
            lights: vec![default_light()],
            cameras: vec![overhead_camera(64, 64)],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::test_fixtures::*;
    use super::*;
    use crate::math::vec3;

    #[test]
    fn dispersion_examples() {
        let (r, g, b) = dispersion_band_iors(1.5, 30.0).unwrap();
        assert!((g - 1.5).abs() < 1e-12);
        // spread = (1.5 - 1) / 30 = 0.0166666...
        assert!((b - r - 0.5 / 30.0).abs() < 1e-12);
        assert!((r - (1.5 - 0.5 / 60.0)).abs() < 1e-12);
        assert!((b - (1.5 + 0.5 / 60.0)).abs() < 1e-12);

        let (r, g, b) = dispersion_band_iors(2.0, 20.0).unwrap();
        assert!((r - 1.975).abs() < 1e-12);
        assert!((g - 2.0).abs() < 1e-12);
        assert!((b - 2.025).abs() < 1e-12);
    }

    #[test]
    fn dispersion_absent_abbe_is_flat() {
        let g = GlassMaterial { abbe_number: None, ..GlassMaterial::default() };
        let (r, gg, b) = g.band_iors();
        assert_eq!(r, 1.5);
        assert_eq!(gg, 1.5);
        assert_eq!(b, 1.5);
    }

    #[test]
    fn dispersion_rejects_nonpositive_abbe() {
        assert!(dispersion_band_iors(1.5, 0.0).is_err());
        assert!(dispersion_band_iors(1.5, -3.0).is_err());
    }

    #[test]
    fn dispersion_band_order_holds() {
        for abbe in [5.0, 20.0, 30.0, 90.0] {
            let (r, g, b) = dispersion_band_iors(1.5, abbe).unwrap();
            assert!(b >= g && g >= r);
        }
    }

    #[test]
    fn dispersion_spread_shrinks_with_abbe() {
        let mut last = f64::INFINITY;
        for abbe in [10.0, 20.0, 40.0, 80.0] {
            let (r, _, b) = dispersion_band_iors(1.5, abbe).unwrap();
            assert!(b - r < last);
            last = b - r;
        }
    }

    #[test]
    fn minimal_scene_validates() {
        let scene = Scene::new(minimal_scene_data(7)).unwrap();
        assert!(scene.objects().is_empty());
        assert!(scene.props().is_empty());
        assert_eq!(scene.seed(), 7);
        assert_eq!(scene.depth_range_m(), 10.0);
    }

    #[test]
    fn duplicate_object_id_names_field() {
        let mut data = minimal_scene_data(7);
        data.objects.push(glass_object(4, "sphere", vec3(0.0, 0.0, 0.2)));
        data.objects.push(glass_object(4, "cube", vec3(0.3, 0.0, 0.2)));
        let err = Scene::new(data).unwrap_err();
        match err {
            SceneError::Validation { field, message } => {
                assert_eq!(field, "object_id");
                assert!(message.contains('4'));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn nan_translation_rejected() {
        let mut data = minimal_scene_data(7);
        let mut obj = glass_object(2, "sphere", vec3(f64::NAN, 0.0, 0.0));
        obj.transform.translation.x = f64::NAN;
        data.objects.push(obj);
        let err = Scene::new(data).unwrap_err();
        assert!(matches!(err, SceneError::Validation { ref field, .. } if field.contains("translation")));
    }

    #[test]
    fn non_unit_rotation_rejected() {
        let mut data = minimal_scene_data(7);
        let mut obj = glass_object(2, "sphere", Vec3::ZERO);
        obj.transform.rotation = Quat { w: 1.0, x: 0.5, y: 0.0, z: 0.0 };
        data.objects.push(obj);
        assert!(Scene::new(data).is_err());
    }

    #[test]
    fn object_lists_canonicalized_by_id() {
        let mut data = minimal_scene_data(7);
        data.objects.push(glass_object(5, "sphere", vec3(0.0, 0.0, 0.2)));
        data.objects.push(glass_object(2, "cube", vec3(0.3, 0.0, 0.2)));
        let scene = Scene::new(data).unwrap();
        let ids: Vec<u32> = scene.objects().iter().map(|o| o.object_id).collect();
        assert_eq!(ids, vec![2, 5]);
    }

    #[test]
    fn class_material_consistency_enforced() {
        let mut data = minimal_scene_data(7);
        let mut obj = glass_object(2, "sphere", Vec3::ZERO);
        obj.material = diffuse_gray();
        data.objects.push(obj);
        assert!(Scene::new(data).is_err());
    }

    #[test]
    fn checker_albedo_samples_alternate() {
        let albedo = DiffuseAlbedo::Checker { a: [1.0, 0.0, 0.0], b: [0.0, 0.0, 1.0], scale_m: 1.0 };
        assert_eq!(albedo.sample(vec3(0.5, 0.5, 0.0)), [1.0, 0.0, 0.0]);
        assert_eq!(albedo.sample(vec3(1.5, 0.5, 0.0)), [0.0, 0.0, 1.0]);
        assert_eq!(albedo.sample(vec3(-0.5, 0.5, 0.0)), [0.0, 0.0, 1.0]);
    }
}
