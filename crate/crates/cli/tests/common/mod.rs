#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn holosim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holosim"))
        .args(args)
        .env_remove("HOLOSIM_THREADS")
        .output()
        .expect("failed to start holosim")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// 8-bit binary PGM.
pub fn write_pgm(path: &Path, width: usize, height: usize, pixels: &[u8]) {
    assert_eq!(pixels.len(), width * height);
    let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
    bytes.extend_from_slice(pixels);
    fs::write(path, bytes).unwrap();
}

/// 5 x 5 image with only the centre lit.
pub fn write_point(path: &Path) {
    let mut px = [0u8; 25];
    px[12] = 255;
    write_pgm(path, 5, 5, &px);
}

pub struct SceneSpec<'a> {
    pub n: usize,
    pub pitch: f64,
    pub depths: &'a [f64],
    pub sweep: (f64, f64, usize),
    pub diffuse: bool,
    pub mask_mode: &'a str,
}

impl Default for SceneSpec<'_> {
    fn default() -> Self {
        SceneSpec {
            n: 256,
            pitch: 4e-6,
            depths: &[-0.05],
            sweep: (0.03, 0.07, 21),
            diffuse: false,
            mask_mode: "linear",
        }
    }
}

/// Scene of point slices, one per depth, written into `dir`.
pub fn write_scene(dir: &Path, spec: &SceneSpec) -> PathBuf {
    write_point(&dir.join("point.pgm"));
    let mut text = format!(
        "name = \"test\"\n\
         [grid]\nnx = {n}\nny = {n}\npitch = {pitch:e}\n\
         [optics]\nwavelengths = [532e-9]\n\
         [object]\ndiffuse = {diffuse}\nseed = 3\n\
         [reference]\namplitude = 1e-3\ntilt_x = 0.0\n\
         [mask]\nmode = \"{mode}\"\n\
         [sweep]\nzmin = {z0:e}\nzmax = {z1:e}\nsteps = {steps}\n",
        n = spec.n,
        pitch = spec.pitch,
        diffuse = spec.diffuse,
        mode = spec.mask_mode,
        z0 = spec.sweep.0,
        z1 = spec.sweep.1,
        steps = spec.sweep.2,
    );
    for d in spec.depths {
        text.push_str(&format!(
            "[[slice]]\nimage = \"point.pgm\"\ndepth = {d:e}\nextent = {:e}\n",
            5.0 * spec.pitch
        ));
    }
    let path = dir.join("scene.toml");
    fs::write(&path, text).unwrap();
    path
}

/// Unquoted `key,value` table as a lookup.
pub fn key_values(path: &Path) -> std::collections::BTreeMap<String, String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let (k, v) = l.split_once(',').unwrap();
            (k.to_string(), v.to_string())
        })
        .collect()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
