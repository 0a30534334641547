//! Output directory writer. All files of a run go through one `Emitter`,
//! which records them in write order for the summary.

use std::fs;
use std::path::{Path, PathBuf};

use spinphonon::protocols::{SweepGrid, Trace};

use crate::error::CliError;
use crate::svg;

pub struct Emitter {
    dir: PathBuf,
    plot: bool,
    written: Vec<String>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output(format!("{}: {e}", path.display()))
}

impl Emitter {
    pub fn new(dir: &Path, plot: bool) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), plot, written: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[String] {
        &self.written
    }

    pub fn plotting(&self) -> bool {
        self.plot
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// CSV with a fixed header; floats use the shortest round-trip form.
    pub fn write_csv<R>(&mut self, name: &str, header: &[&str], rows: R) -> Result<(), CliError>
    where
        R: IntoIterator,
        R::Item: IntoIterator,
        <R::Item as IntoIterator>::Item: ToString,
    {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
        w.write_record(header).map_err(|e| io_err(&path, e))?;
        for row in rows {
            let cells: Vec<String> = row.into_iter().map(|c| c.to_string()).collect();
            w.write_record(&cells).map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Traces sharing one time grid, one column each.
    pub fn write_traces(&mut self, stem: &str, title: &str, traces: &[Trace]) -> Result<(), CliError> {
        let Some(first) = traces.first() else { return Ok(()) };
        let mut header = vec!["time_ns"];
        header.extend(traces.iter().map(|t| t.name.as_str()));
        let rows = (0..first.times.len()).map(|i| {
            let mut r = vec![first.times[i]];
            r.extend(traces.iter().map(|t| t.values.get(i).copied().unwrap_or(f64::NAN)));
            r
        });
        self.write_csv(&format!("{stem}.csv"), &header, rows)?;
        if self.plot {
            let series: Vec<(&str, &[f64], &[f64])> = traces.iter().map(|t| (t.name.as_str(), t.times.as_slice(), t.values.as_slice())).collect();
            self.write_text(&format!("{stem}.svg"), &svg::line_plot(title, "time (ns)", "value", &series))?;
        }
        Ok(())
    }

    /// Long-format grid: one column per axis plus the quantity.
    pub fn write_grid(&mut self, stem: &str, title: &str, grid: &SweepGrid) -> Result<(), CliError> {
        let mut header: Vec<&str> = grid.axes.iter().map(|a| a.name.as_str()).collect();
        header.push(grid.quantity.as_str());
        let shape = grid.shape();
        let rows = grid.values.iter().enumerate().map(|(flat, v)| {
            let mut idx = Vec::with_capacity(shape.len());
            let mut rem = flat;
            for (k, n) in shape.iter().enumerate().rev() {
                idx.push((k, rem % n));
                rem /= n;
            }
            idx.reverse();
            let mut r: Vec<f64> = idx.iter().map(|&(k, i)| grid.axes[k].values[i]).collect();
            r.push(*v);
            r
        });
        self.write_csv(&format!("{stem}.csv"), &header, rows)?;
        if self.plot {
            let doc = match grid.axes.len() {
                2 => svg::heatmap(title, &grid.axes[1].name, &grid.axes[0].name, &grid.axes[1].values, &grid.axes[0].values, &grid.values),
                _ => svg::line_plot(title, &grid.axes[0].name, &grid.quantity, &[(&grid.quantity, &grid.axes[0].values, &grid.values)]),
            };
            self.write_text(&format!("{stem}.svg"), &doc)?;
        }
        Ok(())
    }
}
