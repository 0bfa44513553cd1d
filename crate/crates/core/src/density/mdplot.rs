use serde::{Deserialize, Serialize};

use super::dip::{dip_test_cached, DipNullCache, DipResult, DEFAULT_N_BOOT};
use super::pde::{pareto_density, trapezoid, DensityEstimate, DEFAULT_GRID_SIZE};
use crate::error::{Error, Result};
use crate::gmm::GmmModel;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MdPlotConfig {
    pub grid_size: usize,
    pub n_boot: usize,
    pub seed: u64,
}

impl Default for MdPlotConfig {
    fn default() -> Self {
        MdPlotConfig {
            grid_size: DEFAULT_GRID_SIZE,
            n_boot: DEFAULT_N_BOOT,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdSeries {
    pub label: String,
    pub density: DensityEstimate<f64>,
    pub dip: DipResult,
    pub sample_size: usize,
}

/// Mixture curve and boundaries drawn over the plot, restricted to its
/// value range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdOverlay {
    pub model: GmmModel<f64>,
    pub curve_x: Vec<f64>,
    pub curve_y: Vec<f64>,
    pub boundaries: Vec<f64>,
}

impl MdOverlay {
    pub fn curve_integral(&self) -> f64 {
        trapezoid(&self.curve_x, &self.curve_y)
    }
}

/// Schema of a mirrored-density plot: one density per series, in the order
/// given, on a shared value axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdPlotSpec {
    pub series: Vec<MdSeries>,
    pub overlay: Option<MdOverlay>,
    pub value_min: f64,
    pub value_max: f64,
}

pub fn md_plot<T: Scalar>(
    series: &[(String, Vec<T>)],
    overlay: Option<(&GmmModel<T>, &[T])>,
    config: &MdPlotConfig,
    cache: &DipNullCache,
) -> Result<MdPlotSpec> {
    if series.is_empty() {
        return Err(Error::InvalidArgument("an MD plot needs at least one series".into()));
    }
    let mut out = Vec::with_capacity(series.len());
    for (label, sample) in series {
        let x: Vec<f64> = sample.iter().map(|v| v.as_f64()).collect();
        let density = pareto_density(&x, config.grid_size)?;
        let dip = dip_test_cached(&x, config.n_boot, config.seed, cache)?;
        out.push(MdSeries {
            label: label.clone(),
            sample_size: x.len(),
            density,
            dip,
        });
    }
    if out.iter().all(|s| s.density.degenerate) {
        return Err(Error::InvalidArgument(
            "every MD plot series is constant".into(),
        ));
    }
    let value_min = out
        .iter()
        .map(|s| s.density.kernel_points[0])
        .fold(f64::INFINITY, f64::min);
    let value_max = out
        .iter()
        .map(|s| *s.density.kernel_points.last().expect("non-empty grid"))
        .fold(f64::NEG_INFINITY, f64::max);

    let overlay = overlay.map(|(model, boundaries)| {
        let model = cast_model(model);
        let points = config.grid_size.max(3);
        let step = (value_max - value_min) / (points - 1) as f64;
        let curve_x: Vec<f64> = (0..points)
            .map(|i| if i + 1 == points { value_max } else { value_min + step * i as f64 })
            .collect();
        let curve_y = curve_x.iter().map(|&x| model.pdf(x)).collect();
        let boundaries = boundaries
            .iter()
            .map(|b| b.as_f64())
            .filter(|b| *b >= value_min && *b <= value_max)
            .collect();
        MdOverlay {
            model,
            curve_x,
            curve_y,
            boundaries,
        }
    });
    Ok(MdPlotSpec {
        series: out,
        overlay,
        value_min,
        value_max,
    })
}

fn cast_model<T: Scalar>(m: &GmmModel<T>) -> GmmModel<f64> {
    let conv = |v: &[T]| v.iter().map(|x| x.as_f64()).collect::<Vec<f64>>();
    GmmModel::new(conv(m.weights()), conv(m.means()), conv(m.sds()))
        .expect("a valid model stays valid in f64")
}
