use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde_json::{json, Value};

use dejitter_core::synthesis::{self, pattern};
use dejitter_core::{
    dejitter_line, dejitter_line_pixel, dejitter_pixel, mse, psnr, Displacement, EnergyParams,
    Image, JitterKind, Order, SynthesisSpec,
};

use crate::manifest::Manifest;
use crate::{DejitterArgs, EvaluateArgs, PatternArgs, SynthesizeArgs, UsageError};

const RNG_NAME: &str = "chacha20";

fn load(path: &Path) -> anyhow::Result<Image> {
    Image::load_png(path).with_context(|| format!("cannot load {}", path.display()))
}

fn save(img: &Image, path: &Path) -> anyhow::Result<()> {
    img.save_png(path)
        .with_context(|| format!("cannot write {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn read_displacement(path: &Path) -> anyhow::Result<Displacement> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    text.parse()
        .with_context(|| format!("malformed displacement file {}", path.display()))
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

pub fn synthesize(args: &SynthesizeArgs) -> anyhow::Result<()> {
    let kind = JitterKind::from(args.kind);
    let spec = SynthesisSpec::new(kind, args.sigma2, args.noise_sigma2, args.seed)
        .map_err(|e| UsageError(e.to_string()))?;
    let original = load(&args.input)?;
    let (corrupted, truth) = match kind {
        JitterKind::Line => {
            let (img, d) = synthesis::synthesize_line(&original, &spec)?;
            (img, Displacement::Line(d))
        }
        JitterKind::LinePixel => {
            let (img, d) = synthesis::synthesize_line_pixel(&original, &spec)?;
            (img, Displacement::Scalar(d))
        }
        JitterKind::Pixel => {
            let (img, d) = synthesis::synthesize_pixel(&original, &spec)?;
            (img, Displacement::Vector(d))
        }
    };
    create_dir(&args.outdir)?;
    save(&corrupted, &args.outdir.join("corrupted.png"))?;
    write_text(&args.outdir.join("truth.txt"), &truth.to_text())?;
    let manifest = Manifest {
        kind: kind.as_str().to_string(),
        seed: args.seed,
        sigma2: args.sigma2,
        noise_sigma2: args.noise_sigma2,
        rho: truth.rho(),
        width: original.width(),
        height: original.height(),
        channels: original.channels(),
        rng: RNG_NAME.to_string(),
    };
    manifest.write(&args.outdir.join("manifest.json"))?;
    println!("{}", serde_json::to_string(&manifest)?);
    Ok(())
}

fn resolve_rho(args: &DejitterArgs) -> anyhow::Result<u32> {
    if args.rho != "auto" {
        return args.rho.parse().map_err(|_| {
            UsageError(format!(
                "--rho must be a non-negative integer or `auto`, got `{}`",
                args.rho
            ))
            .into()
        });
    }
    if let Some(truth) = &args.truth {
        return Ok(read_displacement(truth)?.rho());
    }
    let manifest: PathBuf = match &args.manifest {
        Some(path) => path.clone(),
        None => args
            .input
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join("manifest.json"),
    };
    if !manifest.exists() {
        return Err(UsageError(format!(
            "--rho auto needs --manifest, --truth or {}",
            manifest.display()
        ))
        .into());
    }
    Ok(Manifest::read(&manifest)?.rho)
}

pub fn dejitter(args: &DejitterArgs) -> anyhow::Result<()> {
    let kind = JitterKind::from(args.kind);
    let order = Order::from_k(args.order).map_err(|e| UsageError(e.to_string()))?;
    if kind == JitterKind::Pixel && order == Order::Second {
        return Err(UsageError(
            "--order 2 is only available for line and line-pixel jitter".into(),
        )
        .into());
    }
    if kind == JitterKind::Pixel && args.rounds == 0 {
        return Err(UsageError("--rounds must be at least 1".into()).into());
    }
    let rho = resolve_rho(args)?;
    let params =
        EnergyParams::new(args.alpha, args.p, order, rho).map_err(|e| UsageError(e.to_string()))?;
    let input = load(&args.input)?;
    create_dir(&args.outdir)?;

    let mut report = json!({
        "kind": kind.as_str(),
        "alpha": args.alpha,
        "p": args.p,
        "order": order.k(),
        "rho": rho,
    });
    let (image, estimate) = match kind {
        JitterKind::Line => {
            let r = dejitter_line(&input, &params)?;
            report["energy"] = json!(r.energy);
            (r.image, Displacement::Line(r.displacement))
        }
        JitterKind::LinePixel => {
            let r = dejitter_line_pixel(&input, &params)?;
            report["energy"] = json!(r.energy);
            (r.image, Displacement::Scalar(r.field))
        }
        JitterKind::Pixel => {
            let r = dejitter_pixel(&input, &params, args.rounds)?;
            report["energy"] = json!(r.trace.final_energy());
            report["initial_energy"] = json!(r.trace.initial_energy);
            report["rounds"] = json!(r.rounds);
            report["converged"] = json!(r.converged);
            let trace = args
                .trace
                .clone()
                .unwrap_or_else(|| args.outdir.join("trace.csv"));
            write_text(&trace, &r.trace.to_csv())?;
            (r.image, Displacement::Vector(r.field))
        }
    };
    save(&image, &args.outdir.join("reconstructed.png"))?;
    write_text(&args.outdir.join("estimate.txt"), &estimate.to_text())?;
    let text = serde_json::to_string_pretty(&report)?;
    write_text(&args.outdir.join("result.json"), &(text.clone() + "\n"))?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

fn finite_or_string(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn evaluate(args: &EvaluateArgs) -> anyhow::Result<()> {
    let original = load(&args.original)?;
    let reconstructed = load(&args.reconstructed)?;
    let mut report = json!({
        "mse": mse(&original, &reconstructed)?,
        "psnr": finite_or_string(psnr(&original, &reconstructed)?),
    });
    if let (Some(truth), Some(estimate)) = (&args.truth, &args.estimate) {
        let truth = read_displacement(truth)?;
        let estimate = read_displacement(estimate)?;
        report["accuracy"] = json!(estimate.accuracy(&truth, false)?);
        report["accuracy_modulo_shift"] = json!(estimate.accuracy(&truth, true)?);
    }
    let text = serde_json::to_string(&report)?;
    if let Some(path) = &args.output {
        write_text(path, &(text.clone() + "\n"))?;
    }
    println!("{text}");
    Ok(())
}

pub fn pattern(args: &PatternArgs) -> anyhow::Result<()> {
    if !(args.channels == 1 || args.channels == 3) {
        return Err(anyhow!(UsageError("--channels must be 1 or 3".into())));
    }
    let img = if args.stripes {
        pattern::vertical_stripes(args.width, args.height, args.channels, args.seed)?
    } else {
        pattern::scene(args.width, args.height, args.channels, args.seed)?
    };
    if let Some(parent) = args.output.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    save(&img, &args.output)
}
