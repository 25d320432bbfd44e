//! Command-line front end: tables for the figure scripts, evolution runs and
//! verification campaigns.

pub mod commands;
pub mod config;

use clap::{Parser, Subcommand};

use commands::{EvolveArgs, KernelArgs, Range, VerifyArgs};
use config::CommonArgs;

#[derive(Debug, Parser)]
#[command(name = "balescu", version, about = "Linearized Balescu-Lenard operator: tables, evolution, verification")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ψ_R, Ψ_I, x²Ψ_R and ε(|k| = 1, x) on a range of x.
    Dispersion(Range),
    /// J(x), e^{−x²/2}J(x), the quadrature oracle and x³e^{−x²/2}J(x).
    Jay(Range),
    /// Collision frequency eigenvalues λ₁, λ₂ and their derivatives.
    Freq(Range),
    /// Kernel matrices at sampled (v, v*) next to the Landau kernel.
    Kernel(KernelArgs),
    /// Radial evolution of a preset; norms per step and a JSON summary.
    Evolve(EvolveArgs),
    /// Verification campaigns; exits with status 1 if any check fails.
    Verify(VerifyArgs),
    /// Reference constants and check tolerances as JSON.
    Manifest,
}
