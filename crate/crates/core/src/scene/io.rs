//! Scene file reading and writing.
//!
//! Scenes serialize to TOML with a canonical form: table keys sorted
//! (BTreeMap-backed values), instance lists sorted by object id, floats in
//! shortest round-trip notation. Equal scenes produce identical bytes.

use super::{Scene, SceneData, SceneError};
use crate::assets::AssetCatalog;
use serde::Serialize;
use std::fs;
use std::path::Path;

/// Serialize any value through `toml::Value`, which sorts table keys.
pub fn to_canonical_toml<T: Serialize>(value: &T) -> Result<String, SceneError> {
    let v = toml::Value::try_from(value).map_err(|e| SceneError::Serialize(e.to_string()))?;
    toml::to_string_pretty(&v).map_err(|e| SceneError::Serialize(e.to_string()))
}

pub fn parse_scene_str(text: &str, origin: &Path) -> Result<Scene, SceneError> {
    let data: SceneData = toml::from_str(text).map_err(|e| SceneError::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    Scene::new(data)
}

/// Load, validate, and canonicalize a scene file, checking that every mesh
/// and HDRI reference resolves against the catalog.
pub fn load_scene(path: &Path, catalog: &AssetCatalog) -> Result<Scene, SceneError> {
    let text = fs::read_to_string(path).map_err(|e| SceneError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let scene = parse_scene_str(&text, path)?;
    catalog.check_scene_assets(&scene)?;
    Ok(scene)
}

/// Write the canonical serialization of `scene`. Scenes are valid by
/// construction, so this can only fail on I/O or serialization.
pub fn save_scene(scene: &Scene, path: &Path) -> Result<(), SceneError> {
    let text = to_canonical_toml(scene.data())?;
    fs::write(path, text).map_err(|e| SceneError::Io { path: path.to_path_buf(), source: e })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assets::AssetCatalog;
    use crate::math::vec3;
    use crate::scene::test_fixtures::*;
    use crate::scene::Scene;

    fn temp_catalog() -> (tempfile::TempDir, AssetCatalog) {
        let dir = tempfile::tempdir().unwrap();
        crate::assets::write_test_catalog(dir.path()).unwrap();
        let catalog = AssetCatalog::open(dir.path()).unwrap();
        (dir, catalog)
    }

    #[test]
    fn round_trip_is_canonical() {
        let (dir, catalog) = temp_catalog();
        let mut data = minimal_scene_data(42);
        data.objects.push(glass_object(3, "sphere", vec3(0.1, -0.2, 0.04)));
        let scene = Scene::new(data).unwrap();

        let p = dir.path().join("scene.toml");
        save_scene(&scene, &p).unwrap();
        let loaded = load_scene(&p, &catalog).unwrap();
        assert_eq!(&scene, &loaded);

        // save(load(p)) byte-compares equal to the canonical serialization.
        let p2 = dir.path().join("scene2.toml");
        save_scene(&loaded, &p2).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn equal_scenes_serialize_identically() {
        let a = Scene::new(minimal_scene_data(9)).unwrap();
        let b = Scene::new(minimal_scene_data(9)).unwrap();
        assert_eq!(
            to_canonical_toml(a.data()).unwrap(),
            to_canonical_toml(b.data()).unwrap()
        );
    }

    #[test]
    fn permuted_object_order_loads_equal() {
        let (dir, catalog) = temp_catalog();
        let mut data = minimal_scene_data(1);
        data.objects.push(glass_object(2, "sphere", vec3(0.0, 0.0, 0.04)));
        data.objects.push(glass_object(3, "cube", vec3(0.3, 0.0, 0.03)));
        let scene = Scene::new(data.clone()).unwrap();

        data.objects.reverse();
        let scene_rev = Scene::new(data).unwrap();
        assert_eq!(scene, scene_rev);

        let p = dir.path().join("s.toml");
        save_scene(&scene_rev, &p).unwrap();
        assert_eq!(load_scene(&p, &catalog).unwrap(), scene);
    }

    #[test]
    fn unknown_mesh_is_missing_asset() {
        let (dir, catalog) = temp_catalog();
        let mut data = minimal_scene_data(1);
        data.objects.push(glass_object(2, "no_such_mesh", vec3(0.0, 0.0, 0.04)));
        let p = dir.path().join("s.toml");
        save_scene(&Scene::new(data).unwrap(), &p).unwrap();
        let err = load_scene(&p, &catalog).unwrap_err();
        assert!(matches!(err, crate::scene::SceneError::MissingAsset { .. }));
    }

    #[test]
    fn malformed_file_is_parse_error() {
        let (dir, catalog) = temp_catalog();
        let p = dir.path().join("bad.toml");
        std::fs::write(&p, "seed = [this is not toml").unwrap();
        let err = load_scene(&p, &catalog).unwrap_err();
        assert!(matches!(err, crate::scene::SceneError::Parse { .. }));
    }
}
