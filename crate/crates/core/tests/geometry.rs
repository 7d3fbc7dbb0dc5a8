use flowkit::fisheye::{analytic_flow, rectify, CameraModel, DepthMap, PlaneScene, RigidPose};
use flowkit::Image;
use nalgebra::{Matrix6, Vector3, Vector6};

/// Stationary point of a least-squares quadratic fitted to a 7×7 window
/// around `(x0, y0)`.
fn quadratic_stationary_point(img: &Image, x0: usize, y0: usize) -> (f64, f64) {
    let mut ata = Matrix6::zeros();
    let mut atb = Vector6::zeros();
    for dy in -3i64..=3 {
        for dx in -3i64..=3 {
            let (x, y) = (dx as f64, dy as f64);
            let row = Vector6::new(1.0, x, y, x * x, x * y, y * y);
            let value = img.get((x0 as i64 + dx) as usize, (y0 as i64 + dy) as usize, 0) as f64;
            ata += row * row.transpose();
            atb += row * value;
        }
    }
    let c = ata.lu().solve(&atb).unwrap();
    // gradient zero: [2c3 c4; c4 2c5] p = -[c1; c2]
    let det = 4.0 * c[3] * c[5] - c[4] * c[4];
    let px = (-c[1] * 2.0 * c[5] + c[2] * c[4]) / det;
    let py = (-c[2] * 2.0 * c[3] + c[1] * c[4]) / det;
    (x0 as f64 + px, y0 as f64 + py)
}

#[test]
fn rectified_checkerboard_corners_match_pinhole_projection() {
    let n = 512;
    let c = (n as f64 - 1.0) / 2.0;
    let fisheye = CameraModel::poly4(n, n, c, c, [150.0, 0.0, -2.0, 0.0], None).unwrap();
    // saddle points of the texture sit on a 0.25 m grid of the plane z = 2
    let scene = PlaneScene::fronto_parallel(2.0, 0.5, 0.4);
    let src = scene.render(&fisheye, &RigidPose::identity()).unwrap().image;

    let (m, f) = (400, 200.0);
    let cm = (m as f64 - 1.0) / 2.0;
    let pinhole = CameraModel::pinhole(m, m, f, f, cm, cm).unwrap();
    let (rectified, fraction) = rectify(&src, &fisheye, &pinhole).unwrap();
    assert!(fraction > 0.0 && fraction < 1.0);

    let mut checked = 0;
    for gy in -6i32..=6 {
        for gx in -6i32..=6 {
            let point = Vector3::new(gx as f64 * 0.25, gy as f64 * 0.25, 2.0);
            let (px, py) = pinhole.project(point).unwrap();
            if px < 8.0 || py < 8.0 || px > m as f64 - 9.0 || py > m as f64 - 9.0 {
                continue;
            }
            let (sx, sy) = quadratic_stationary_point(&rectified, px.round() as usize, py.round() as usize);
            let err = (sx - px).hypot(sy - py);
            assert!(err < 0.5, "corner ({gx}, {gy}): error {err}");
            checked += 1;
        }
    }
    assert!(checked >= 100, "{checked}");
}

#[test]
fn forward_translation_flow_is_radial_about_epipole() {
    let cam = CameraModel::pinhole(160, 120, 150.0, 150.0, 80.0, 60.0).unwrap();
    let depth = DepthMap::from_fn(160, 120, |x, y| 3.0 + ((x * 31 + y * 17) % 13) as f64 * 0.4);
    let t = Vector3::new(0.2, -0.1, 0.5);
    let flow = analytic_flow(&depth, &RigidPose::from_translation(t), &cam).unwrap();
    let epipole = cam.project(t).unwrap();
    let mut checked = 0;
    for y in 0..120 {
        for x in 0..160 {
            let (u, v) = flow.at(x, y);
            let (ex, ey) = (x as f64 - epipole.0, y as f64 - epipole.1);
            let (fn_, en) = (u.hypot(v), ex.hypot(ey));
            if fn_ < 1e-9 || en < 1.0 {
                continue;
            }
            let cross = (u / fn_) * (ey / en) - (v / fn_) * (ex / en);
            assert!(cross.abs() < 1e-6, "({x}, {y}): {cross}");
            checked += 1;
        }
    }
    assert!(checked > 19_000);
}

#[test]
fn rotation_flow_ignores_depth_scale() {
    let cam = CameraModel::poly4(96, 64, 47.5, 31.5, [40.0, 1.0, -0.5, 0.0], None).unwrap();
    let depth = DepthMap::from_fn(96, 64, |x, y| 1.0 + (x + 2 * y) as f64 * 0.01);
    let turn = RigidPose::from_axis_angle(Vector3::new(0.1, 1.0, -0.3), 0.04);
    let a = analytic_flow(&depth, &turn, &cam).unwrap();
    let b = analytic_flow(&depth.scaled(7.5), &turn, &cam).unwrap();
    assert_eq!(a.valid(), b.valid());
    for (i, u, v) in a.iter_valid() {
        assert!((u - b.u()[i]).abs() < 1e-6 && (v - b.v()[i]).abs() < 1e-6);
    }
}

#[test]
fn camera_json_files_load() {
    let text = r#"{"kind":"poly4","width":640,"height":480,"cx":319.5,"cy":239.5,"params":[330.0,-12.0,18.0,-4.0]}"#;
    let cam: CameraModel = serde_json::from_str(text).unwrap();
    assert!(cam.is_fisheye());
    let again: CameraModel = serde_json::from_str(&serde_json::to_string(&cam).unwrap()).unwrap();
    assert_eq!(again, cam);
    let bad = r#"{"kind":"poly4","width":64,"height":48,"cx":0,"cy":0,"params":[-1.0,0,0,0]}"#;
    assert!(serde_json::from_str::<CameraModel>(bad).is_err());
}
