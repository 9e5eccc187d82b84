use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use gpi_core::gpi::{closed_loop_char_poly, compute_gains, GpiDesign};
use gpi_core::harness::scenario::ReferenceSpec;
use gpi_core::harness::{
    export_csv, export_metrics, export_plot, run_scenario, JointId, JointScenario, Scenario, SimResult,
};
use gpi_core::kinematics::{forward, inverse, ArmLength, ShoulderAngles, WristPosition};
use gpi_core::plant::SecondOrderTf;
use gpi_core::poly;
use gpi_core::sysid::{estimate_tf, IoRecord, DEFAULT_TS};
use gpi_core::trajectory::TaughtTrajectory;

#[derive(Parser)]
#[command(name = "gpi", version, about = "GPI tracking control of a soft pneumatic shoulder")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a scenario file; writes per-joint CSVs, plot.svg and metrics.json.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pole-placement gains for a design and plant.
    Gains {
        #[arg(long)]
        xi: f64,
        #[arg(long)]
        wn: f64,
        #[arg(long)]
        g0: f64,
        #[arg(long)]
        g1: f64,
        #[arg(long)]
        g2: f64,
    },
    /// Wrist position from shoulder angles.
    Fk {
        #[arg(long, allow_hyphen_values = true)]
        theta1: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta2: f64,
        /// Arm length in metres.
        #[arg(long, default_value_t = 0.14)]
        la: f64,
    },
    /// Shoulder angles from a wrist position.
    Ik {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        #[arg(long, default_value_t = 0.14)]
        la: f64,
    },
    /// Identify g0 / (s^2 + g1 s + g2) from a `t,u,theta` CSV.
    Sysid {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TS)]
        ts: f64,
    },
    /// Store a `t,theta,theta_dot` demonstration and optionally replay it.
    Teach {
        #[arg(long)]
        record: PathBuf,
        /// Also run the closed loop on the recorded reference.
        #[arg(long)]
        repeat: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "s1")]
        joint: JointId,
        /// Moving-average the recorded velocity before differentiation.
        #[arg(long)]
        smooth: bool,
        /// Time the final angle is held after the demonstration ends.
        #[arg(long, default_value_t = 5.0)]
        hold: f64,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Run { scenario, out } => {
            let s = Scenario::load(&scenario)?;
            let r = run_scenario(&s)?;
            write_outputs(&r, &out)
        }
        Cmd::Gains { xi, wn, g0, g1, g2 } => {
            let design = GpiDesign::new(xi, wn)?;
            let tf = SecondOrderTf::new(g0, g1, g2)?;
            let g = compute_gains(&design, &tf)?;
            println!("k0 = {}", g.k0);
            println!("k1 = {}", g.k1);
            println!("k2 = {}", g.k2);
            println!("k3 = {}", g.k3);
            let p = design.placed_pole();
            println!("placed poles: {:.6} +/- {:.6}i (each twice)", p.re, p.im);
            let roots = poly::roots(&closed_loop_char_poly(&g, &tf));
            let listed: Vec<String> = roots.iter().map(|r| format!("{:.6}{:+.6}i", r.re, r.im)).collect();
            println!("closed-loop roots: {}", listed.join(", "));
            Ok(())
        }
        Cmd::Fk { theta1, theta2, la } => {
            let p = forward(
                &ShoulderAngles {
                    theta_s1: theta1,
                    theta_s2: theta2,
                },
                ArmLength::new(la)?,
            );
            println!("x = {}\ny = {}\nz = {}", p.x, p.y, p.z);
            Ok(())
        }
        Cmd::Ik { x, y, z, la } => {
            let q = inverse(&WristPosition { x, y, z }, ArmLength::new(la)?)?;
            println!("theta1 = {}\ntheta2 = {}", q.theta_s1, q.theta_s2);
            Ok(())
        }
        Cmd::Sysid { csv, ts } => {
            let rec = IoRecord::load_csv(&csv, ts)?;
            let est = estimate_tf(&rec)?;
            println!("g0 = {}", est.tf.gamma0);
            println!("g1 = {}", est.tf.gamma1);
            println!("g2 = {}", est.tf.gamma2);
            println!("fit = {:.2} %", est.fit);
            Ok(())
        }
        Cmd::Teach {
            record,
            repeat,
            out,
            joint,
            smooth,
            hold,
        } => {
            let tt = TaughtTrajectory::load_csv(&record)?;
            std::fs::create_dir_all(&out).with_context(|| format!("{}", out.display()))?;
            let stored = out.join("taught.csv");
            tt.save_csv(&stored)?;
            println!(
                "stored {} samples ({:.3} s) in {}",
                tt.samples.len(),
                tt.duration(),
                stored.display()
            );
            if repeat {
                let s = teach_scenario(&stored, joint, smooth, tt.duration() + hold)?;
                let r = run_scenario(&s)?;
                write_outputs(&r, &out)?;
            }
            Ok(())
        }
    }
}

fn teach_scenario(file: &Path, joint: JointId, smooth: bool, duration: f64) -> Result<Scenario> {
    let file = std::path::absolute(file)?;
    let s = Scenario {
        name: format!("teach-{joint}"),
        dt: DEFAULT_TS,
        duration,
        noise_amplitude: 0.0,
        seed: 0,
        joints: vec![JointScenario::new(joint, ReferenceSpec::Taught { file, smooth })],
    };
    s.validate()?;
    Ok(s)
}

fn write_outputs(r: &SimResult, out: &Path) -> Result<()> {
    export_csv(r, out)?;
    export_plot(r, &out.join("plot.svg"))?;
    export_metrics(r, &out.join("metrics.json"))?;
    for j in &r.joints {
        let m = &j.metrics;
        let settle = if m.settled() {
            format!("{:.3} s", m.settle_time)
        } else {
            "never".to_string()
        };
        println!(
            "{}: rmse {:.3e} rad, max |e| {:.3e} rad, steady-state {:.3e} rad, settles {}",
            j.joint, m.rmse, m.max_abs_error, m.steady_state_error, settle
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}
