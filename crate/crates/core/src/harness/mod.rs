//! Monte-Carlo coverage experiments, noise laws, Clopper–Pearson intervals,
//! the semi-empirical CSV protocol, and file export.

mod cp;
mod export;
mod noise;
mod report;
mod semi;
mod sim;

pub use cp::clopper_pearson;
pub use export::{
    analytic_json, export_analytic, export_region, load_region, read_text, sidecar_path, write_text, ExportFormat,
};
pub use noise::{gen_noise, NoiseSpec, HETERO_MEANS, HETERO_WEIGHTS};
pub use report::{digest, CoverageReport, CP_CONFIDENCE};
pub use semi::{
    load_table, parse_table, run_semi_empirical, run_semi_empirical_table, SemiEmpiricalConfig, Table,
    SEMI_PERMUTATIONS,
};
pub use sim::{design, run_coverage_sim, InfName, Method, OmegaSetting, SimConfig};
