mod approx_error;
mod channel_check;
mod labeled_needed;
mod reduction;
mod simulate;
mod solve;
mod usefulness;

use serde::Serialize;

pub use approx_error::ApproxErrorParams;
pub use channel_check::ChannelCheckParams;
pub use labeled_needed::LabeledNeededParams;
pub use reduction::ReductionParams;
pub use simulate::SimulateParams;
pub use solve::SolveParams;
pub use usefulness::UsefulnessParams;

use crate::config::{resolve, Common, FileConfig};
use crate::error::Result;
use crate::output::Table;
use crate::{Command, Sweep};

pub struct CommandOutput {
    /// Resolved parameters echoed into the manifest.
    pub config: toml::Value,
    pub tables: Vec<Table>,
}

#[derive(Serialize)]
struct Resolved<'a, P: Serialize> {
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<&'a str>,
    params: &'a P,
}

impl<'a, P: Serialize> Resolved<'a, P> {
    fn theory(common: &Common, params: &'a P) -> Self {
        Resolved { seed: None, reps: None, tol: Some(common.tol), sweep: None, params }
    }

    fn simulation(common: &Common, params: &'a P) -> Self {
        Resolved { seed: Some(common.seed), reps: Some(common.reps), tol: Some(common.tol), sweep: None, params }
    }

    fn into_value(self) -> Result<toml::Value> {
        toml::Value::try_from(self)
            .map_err(|e| crate::error::CliError::Io(std::io::Error::other(format!("cannot serialize config: {e}"))))
    }
}

pub fn dispatch(
    command: &Command,
    file: &FileConfig,
    common: &Common,
    overrides: &[(String, toml::Value)],
) -> Result<CommandOutput> {
    let name = command.name();
    match command {
        Command::Solve => {
            let p: SolveParams = resolve(file, name, overrides)?;
            let tables = solve::run(&p, common)?;
            Ok(CommandOutput { config: Resolved::theory(common, &p).into_value()?, tables })
        }
        Command::ApproxError => {
            let p: ApproxErrorParams = resolve(file, name, overrides)?;
            let tables = approx_error::run(&p)?;
            let mut r = Resolved::theory(common, &p);
            r.tol = None;
            Ok(CommandOutput { config: r.into_value()?, tables })
        }
        Command::Usefulness => {
            let p: UsefulnessParams = resolve(file, name, overrides)?;
            let tables = usefulness::run(&p)?;
            let mut r = Resolved::theory(common, &p);
            r.tol = None;
            Ok(CommandOutput { config: r.into_value()?, tables })
        }
        Command::LabeledNeeded => {
            let p: LabeledNeededParams = resolve(file, name, overrides)?;
            let tables = labeled_needed::run(&p, common)?;
            let mut r = Resolved::simulation(common, &p);
            r.tol = None;
            if !p.empirical {
                r.seed = None;
                r.reps = None;
            }
            Ok(CommandOutput { config: r.into_value()?, tables })
        }
        Command::Reduction { sweep } => {
            let p: ReductionParams = resolve(file, name, overrides)?;
            let tables = reduction::run(&p, *sweep, common)?;
            let mut r = if p.monte_carlo { Resolved::simulation(common, &p) } else { Resolved::theory(common, &p) };
            r.sweep = Some(match sweep {
                Sweep::Lambda => "lambda",
                Sweep::C => "c",
            });
            Ok(CommandOutput { config: r.into_value()?, tables })
        }
        Command::Simulate => {
            let p: SimulateParams = resolve(file, name, overrides)?;
            let tables = simulate::run(&p, common)?;
            Ok(CommandOutput { config: Resolved::simulation(common, &p).into_value()?, tables })
        }
        Command::ChannelCheck => {
            let p: ChannelCheckParams = resolve(file, name, overrides)?;
            let tables = channel_check::run(&p, common)?;
            let mut r = Resolved::simulation(common, &p);
            r.reps = None;
            r.tol = None;
            Ok(CommandOutput { config: r.into_value()?, tables })
        }
    }
}
