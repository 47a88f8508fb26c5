//! Render a temperature field through the radiometric colormap, decode it
//! back, and store it as a 16-bit PNG with a calibration sidecar.
//!
//! ```text
//! cargo run --example thermal_colormap -- [out_dir]
//! ```

use std::path::PathBuf;

use thermocrack::imaging::{color_to_temp, io, temp_to_color, ThermalField};

fn main() -> thermocrack::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("thermocrack-colormap"), PathBuf::from);
    std::fs::create_dir_all(&out).map_err(|e| thermocrack::Error::io(&out, e))?;

    let (w, h, t_min, t_max) = (160, 120, 14.0, 28.0);
    let temps = (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            let crack = ((y - 60.0) - 0.4 * (x - 80.0)).abs() < 1.5;
            20.0 + 0.01 * x + if crack { 4.5 } else { 0.0 }
        })
        .collect();
    let field = ThermalField::new(w, h, temps, t_min, t_max)?;

    let render = temp_to_color(&field)?;
    for (label, t) in [("t_min", t_min), ("wall", 20.0), ("t_max", t_max)] {
        let one = ThermalField::uniform(1, 1, t, t_min, t_max)?;
        println!("{label:<5} {t:>5.1} °C -> rgb {:?}", temp_to_color(&one)?.get(0, 0));
    }

    let back = color_to_temp(&render, t_min, t_max)?;
    let err = field
        .temps()
        .iter()
        .zip(back.temps())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("colormap roundtrip max error {err:.4} °C (bound {:.4})", (t_max - t_min) / 510.0);

    io::save_png(&render, out.join("render.png"))?;
    let raw = out.join("field.png");
    io::save_thermal(&field, &raw)?;
    let loaded = io::load_thermal(&raw)?;
    let err = field
        .temps()
        .iter()
        .zip(loaded.temps())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("16-bit PNG roundtrip max error {err:.2e} °C, sidecar {}", io::sidecar_path(&raw).display());
    Ok(())
}
