//! Check reports: one record per verified identity, rendered both as
//! text and as JSON (the two renderings carry the same records).

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rational::{format_rat, rat_to_f64, Rat};
use crate::scalar::Scalar;

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// where the worst residual was observed (grid point, parameter, ...)
    pub witness: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub version: &'static str,
    /// sha-256 over the canonicalized input config(s)
    pub config_hash: String,
    pub records: Vec<CheckRecord>,
    pub notes: Vec<String>,
    pub pass: bool,
}

pub fn config_hash(texts: &[&str]) -> String {
    let mut h = Sha256::new();
    for t in texts {
        h.update(t.as_bytes());
        h.update([0u8]);
    }
    hex(&h.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl Report {
    pub fn new(command: impl Into<String>, config_hash: String) -> Self {
        Report {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION"),
            config_hash,
            records: Vec::new(),
            notes: Vec::new(),
            pass: true,
        }
    }

    pub fn check(
        &mut self,
        name: impl Into<String>,
        witness: impl Into<String>,
        residual: f64,
        tolerance: f64,
    ) -> bool {
        let pass = residual.is_finite() && residual <= tolerance;
        self.pass &= pass;
        self.records.push(CheckRecord {
            name: name.into(),
            witness: witness.into(),
            residual,
            tolerance,
            pass,
        });
        pass
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "gmra {} v{}  (config {})\n",
            self.command,
            self.version,
            &self.config_hash[..16]
        ));
        for r in &self.records {
            out.push_str(&format!(
                "[{}] {:<44} residual {:.3e} (tol {:.1e})  at {}\n",
                if r.pass { "PASS" } else { "FAIL" },
                r.name,
                r.residual,
                r.tolerance,
                r.witness
            ));
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out.push_str(&format!(
            "overall: {}\n",
            if self.pass { "PASS" } else { "FAIL" }
        ));
        out
    }

    /// Writes report.txt and report.json into the output directory.
    pub fn write(&self, outdir: &Path) -> Result<()> {
        std::fs::create_dir_all(outdir)?;
        std::fs::write(outdir.join("report.txt"), self.render_text())?;
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(outdir.join("report.json"), json)?;
        Ok(())
    }
}

/// Writes a sampled function as CSV: x (decimal), x (p/q), re, im.
pub fn write_fn_csv(path: &Path, xs: &[Rat], vals: &[Scalar]) -> Result<()> {
    if xs.len() != vals.len() {
        return Err(Error::DimensionMismatch("csv xs/vals length".into()));
    }
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "x,x_rational,re,im")?;
    for (x, v) in xs.iter().zip(vals) {
        let z = v.to_complex();
        writeln!(f, "{:.12},{},{:.15e},{:.15e}", rat_to_f64(x), format_rat(x), z.re, z.im)?;
    }
    Ok(())
}

/// A minimal matplotlib stub referencing the CSV files next to it.
pub fn write_plot_stub(outdir: &Path, csvs: &[String]) -> Result<()> {
    let mut body = String::from(
        "#!/usr/bin/env python3\n\
         # Plot stub: renders the CSV files emitted alongside this script.\n\
         import csv, os, sys\n\
         import matplotlib.pyplot as plt\n\n\
         here = os.path.dirname(os.path.abspath(__file__))\n\
         files = [\n",
    );
    for c in csvs {
        body.push_str(&format!("    {c:?},\n"));
    }
    body.push_str(
        "]\n\
         for name in files:\n\
             xs, re = [], []\n\
             with open(os.path.join(here, name)) as fh:\n\
                 for row in csv.DictReader(fh):\n\
                     xs.append(float(row['x']))\n\
                     re.append(float(row['re']))\n\
             plt.plot(xs, re, label=name)\n\
         plt.legend()\n\
         plt.xlabel('x')\n\
         plt.ylabel('Re value')\n\
         plt.savefig(os.path.join(here, 'plot.png'), dpi=150)\n\
         print('wrote plot.png')\n",
    );
    std::fs::write(outdir.join("plot.py"), body)?;
    Ok(())
}
