use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use holosim::io::{self, Scaling};
use holosim::metrics::{solid_angle, solid_angle_small};
use holosim::mvs::{conjugate_distance, magnification, scan_range_for_depth_interval, LensSpec};
use holosim::pipeline;
use holosim::propagation::{fresnel_propagate, propagate, PadFactor, PropagationSpec};

#[derive(Parser)]
#[command(
    name = "holosim",
    version,
    about = "Scanning-projector hologram display simulator"
)]
struct Cli {
    /// Worker threads; 1 runs everything serially.
    #[arg(long, global = true, env = "HOLOSIM_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Record the hologram of a scene, reconstruct it and score the result.
    Simulate {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scene's diffuser seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write raw complex fields.
        #[arg(long)]
        dump_fields: bool,
    },
    /// Propagate a field dump by a fixed distance.
    Propagate {
        #[arg(long = "in")]
        input: PathBuf,
        /// Distance in meters; negative propagates backwards.
        #[arg(long, allow_hyphen_values = true)]
        dz: f64,
        #[arg(long, value_enum, default_value = "as")]
        method: MethodArg,
        #[arg(long)]
        out: PathBuf,
        /// Zero-padding factor for the angular-spectrum method.
        #[arg(long, default_value_t = 2)]
        pad: usize,
        #[arg(long)]
        no_band_limit: bool,
        /// Field dump to compare the result against (relative L2 error).
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Scan range, magnification and viewing solid angle for a projector design.
    MvsDesign {
        /// Lens focal length, meters.
        #[arg(long)]
        focal: f64,
        #[arg(long)]
        znear: f64,
        #[arg(long)]
        zfar: f64,
        /// Screen size as <width>x<height> in meters.
        #[arg(long, value_parser = parse_screen)]
        screen: (f64, f64),
        /// Viewing distance, meters.
        #[arg(long)]
        watch: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Peak intensity versus reconstruction depth, with per-slice fidelity.
    Sweep {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        zmin: f64,
        #[arg(long)]
        zmax: f64,
        #[arg(long, default_value_t = 41)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    /// Angular spectrum
    As,
    Fresnel,
}

fn parse_screen(s: &str) -> Result<(f64, f64), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected <width>x<height>, got '{s}'"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
    Ok((num(w)?, num(h)?))
}

/// A failure and the exit status it maps to.
enum Failure {
    /// Bad flags or out-of-range numbers (exit 2).
    Usage(anyhow::Error),
    /// Anything that went wrong while running (exit 1).
    Run(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Run(e.into())
    }
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(anyhow!("{msg}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("starting worker pool")?;
    }
    match cli.command {
        Command::Simulate {
            scene,
            out,
            seed,
            dump_fields,
        } => simulate(&scene, &out, seed, dump_fields),
        Command::Propagate {
            input,
            dz,
            method,
            out,
            pad,
            no_band_limit,
            reference,
        } => propagate_cmd(
            &input,
            dz,
            method,
            &out,
            pad,
            !no_band_limit,
            reference.as_deref(),
        ),
        Command::MvsDesign {
            focal,
            znear,
            zfar,
            screen,
            watch,
            out,
        } => mvs_design(focal, znear, zfar, screen, watch, &out),
        Command::Sweep {
            scene,
            zmin,
            zmax,
            steps,
            out,
        } => sweep(&scene, zmin, zmax, steps, &out),
    }
}

/// Writes into a hidden staging directory and moves the results into `out`
/// only when `work` succeeds, so a failed run leaves nothing half-written.
fn staged(out: &Path, work: impl FnOnce(&Path) -> Result<(), Failure>) -> Result<(), Failure> {
    let created = !out.exists();
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let stage = out.join(".holosim-partial");
    if stage.exists() {
        fs::remove_dir_all(&stage).with_context(|| format!("clearing {}", stage.display()))?;
    }
    fs::create_dir(&stage).with_context(|| format!("creating {}", stage.display()))?;
    let result = work(&stage).and_then(|()| {
        for entry in fs::read_dir(&stage).context("listing staged outputs")? {
            let entry = entry.context("listing staged outputs")?;
            let target = out.join(entry.file_name());
            if target.is_dir() {
                fs::remove_dir_all(&target)
                    .with_context(|| format!("replacing {}", target.display()))?;
            }
            fs::rename(entry.path(), &target)
                .with_context(|| format!("moving output to {}", target.display()))?;
        }
        Ok(())
    });
    let _ = fs::remove_dir_all(&stage);
    if result.is_err() && created {
        let _ = fs::remove_dir_all(out);
    }
    result
}

fn simulate(scene: &Path, out: &Path, seed: Option<u64>, dump_fields: bool) -> Result<(), Failure> {
    let mut config =
        io::load_scene(scene).with_context(|| format!("loading scene {}", scene.display()))?;
    if let Some(seed) = seed {
        config.setup.seed = seed;
    }
    staged(out, |dir| {
        let reports =
            pipeline::simulate(&config, dir, dump_fields).context("simulation pipeline")?;
        for (w, r) in config.wavelengths.iter().zip(&reports) {
            println!(
                "{:.1} nm: focus z = {:.4} m at ({:.3e}, {:.3e}) m, peak/mean = {:.1}",
                w * 1e9,
                r.focus_depth,
                r.focus_xy.0,
                r.focus_xy.1,
                r.peak_to_mean
            );
        }
        Ok(())
    })
}

#[allow(clippy::too_many_arguments)]
fn propagate_cmd(
    input: &Path,
    dz: f64,
    method: MethodArg,
    out: &Path,
    pad: usize,
    band_limit: bool,
    reference: Option<&Path>,
) -> Result<(), Failure> {
    if !dz.is_finite() {
        return Err(usage("--dz must be a finite number"));
    }
    let pad = PadFactor::new(pad).map_err(usage)?;
    let field = io::read_field(input).with_context(|| format!("reading {}", input.display()))?;
    let result = match method {
        MethodArg::As => propagate(
            &field,
            dz,
            &PropagationSpec::angular_spectrum(pad, band_limit),
        ),
        MethodArg::Fresnel => fresnel_propagate(&field, dz),
    }
    .context("propagation")?;
    let error = reference
        .map(|p| -> anyhow::Result<f64> {
            let r = io::read_field(p).with_context(|| format!("reading {}", p.display()))?;
            result
                .relative_l2_distance(&r)
                .context("comparing with reference")
        })
        .transpose()?;
    staged(out, |dir| {
        io::write_field(&result, dir.join("field.bin"))?;
        io::write_intensity_image(
            &result.intensity(),
            dir.join("intensity.pgm"),
            Scaling::Linear,
        )?;
        let mut rows = vec![
            ("dz_m".to_string(), format!("{dz:e}")),
            (
                "method".to_string(),
                match method {
                    MethodArg::As => "angular_spectrum",
                    MethodArg::Fresnel => "fresnel",
                }
                .to_string(),
            ),
            ("input_pitch_m".to_string(), format!("{:e}", field.pitch())),
            (
                "output_pitch_m".to_string(),
                format!("{:e}", result.pitch()),
            ),
            ("power_in".to_string(), format!("{:e}", field.power())),
            ("power_out".to_string(), format!("{:e}", result.power())),
        ];
        if let Some(e) = error {
            rows.push(("relative_l2_vs_reference".to_string(), format!("{e:e}")));
            println!("relative L2 error vs reference: {e:.3e}");
        }
        write_key_values(&dir.join("propagate.csv"), &rows)
    })
}

fn write_key_values(path: &Path, rows: &[(String, String)]) -> Result<(), Failure> {
    let mut text = String::from("key,value\n");
    for (k, v) in rows {
        text.push_str(&format!("{k},{v}\n"));
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Scan travel below this counts as mechanically easy.
const SCAN_BAR_M: f64 = 0.01;

fn mvs_design(
    focal: f64,
    znear: f64,
    zfar: f64,
    screen: (f64, f64),
    watch: f64,
    out: &Path,
) -> Result<(), Failure> {
    for (name, v) in [
        ("--focal", focal),
        ("--znear", znear),
        ("--zfar", zfar),
        ("--screen width", screen.0),
        ("--screen height", screen.1),
        ("--watch", watch),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(usage(format!("{name} must be a positive number, got {v}")));
        }
    }
    let lens = LensSpec::new(focal, focal).map_err(usage)?;
    let scan = scan_range_for_depth_interval(&lens, znear, zfar).map_err(usage)?;
    let chip_near = conjugate_distance(&lens, znear).map_err(usage)?;
    let chip_far = conjugate_distance(&lens, zfar).map_err(usage)?;
    // Chip-to-image magnification: the chip sits at the conjugate distance
    // and is imaged out to the depth.
    let m_near = magnification(chip_near, znear);
    let m_far = magnification(chip_far, zfar);
    let exact = solid_angle(screen.0, screen.1, watch);
    let small = solid_angle_small(screen.0, screen.1, watch);
    let verdict = if scan < SCAN_BAR_M { "PASS" } else { "FAIL" };

    println!(
        "scan range: {:.5} mm ({verdict} against the 1 cm bar)",
        scan * 1e3
    );
    println!(
        "chip distance: {:.6} mm (near) .. {:.6} mm (far)",
        chip_near * 1e3,
        chip_far * 1e3
    );
    println!("magnification: {m_near:.1} (near) .. {m_far:.1} (far)");
    println!("solid angle: {exact:.5} sr exact, {small:.5} sr small-angle");

    let f = |v: f64| format!("{v:e}");
    let rows = vec![
        ("focal_length_m".to_string(), f(focal)),
        ("z_near_m".to_string(), f(znear)),
        ("z_far_m".to_string(), f(zfar)),
        ("chip_distance_near_m".to_string(), f(chip_near)),
        ("chip_distance_far_m".to_string(), f(chip_far)),
        ("scan_range_m".to_string(), f(scan)),
        ("scan_range_mm".to_string(), format!("{:.5}", scan * 1e3)),
        ("scan_under_1cm".to_string(), verdict.to_string()),
        ("magnification_near".to_string(), f(m_near)),
        ("magnification_far".to_string(), f(m_far)),
        ("screen_width_m".to_string(), f(screen.0)),
        ("screen_height_m".to_string(), f(screen.1)),
        ("watch_distance_m".to_string(), f(watch)),
        ("solid_angle_sr".to_string(), f(exact)),
        ("solid_angle_small_angle_sr".to_string(), f(small)),
    ];
    staged(out, |dir| {
        write_key_values(&dir.join("mvs_design.csv"), &rows)
    })
}

fn sweep(scene: &Path, zmin: f64, zmax: f64, steps: usize, out: &Path) -> Result<(), Failure> {
    if !(zmin > 0.0 && zmax > zmin && zmax.is_finite()) {
        return Err(usage(format!(
            "depth range must satisfy 0 < zmin < zmax, got [{zmin}, {zmax}]"
        )));
    }
    if steps < 2 {
        return Err(usage(format!("--steps must be at least 2, got {steps}")));
    }
    let config =
        io::load_scene(scene).with_context(|| format!("loading scene {}", scene.display()))?;
    staged(out, |dir| {
        let result = pipeline::sweep(&config, (zmin, zmax), steps).context("depth sweep")?;
        pipeline::write_sweep(&result, dir).context("writing sweep tables")?;
        let maxima: Vec<String> = result
            .local_maxima
            .iter()
            .map(|&i| format!("{:.4}", result.focus.curve[i].0))
            .collect();
        println!(
            "brightest plane z = {:.4} m; local maxima at [{}] m",
            result.focus.depth,
            maxima.join(", ")
        );
        Ok(())
    })
}
