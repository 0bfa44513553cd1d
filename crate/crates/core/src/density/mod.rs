//! Density estimates, unimodality tests and MD-plot assembly.

mod dip;
mod mdplot;
mod pde;
mod svg;

pub use dip::{
    dip_sorted, dip_statistic, dip_test, dip_test_cached, DipNull, DipNullCache, DipResult,
    DEFAULT_N_BOOT, MIN_N_BOOT,
};
pub use pde::{
    pareto_density, pareto_radius, DensityEstimate, DEFAULT_GRID_SIZE, RADIUS_PERCENTILE,
    RADIUS_RULE, RADIUS_SUBSAMPLE,
};
pub use mdplot::{md_plot, MdOverlay, MdPlotConfig, MdPlotSpec, MdSeries};
pub use svg::{render_svg, svg_string};
