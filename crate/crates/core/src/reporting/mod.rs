//! Residual load duration curves, price duration curves, generation and
//! capacity mixes and LCOE stacks, written as CSV with SVG renderings.

mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coupling::{FinalState, IterationDigest};
use crate::hourly::{HourlySolution, MarketStats};
use crate::scenario::TechKind;
use crate::validation::Model;
use crate::{Error, Result, HOURS_PER_YEAR};

use svg::{color, Chart};

/// One descending-sorted hourly series [MW], indexed by rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub label: String,
    pub mw: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rldc {
    pub year: i32,
    pub hour_weight: f64,
    /// First curve is the inflexible load; each later curve has one more
    /// technology subtracted and is labelled with it.
    pub curves: Vec<Curve>,
}

impl Rldc {
    /// Energy under curve `i` [MWh].
    pub fn integral(&self, i: usize) -> f64 {
        self.hour_weight * self.curves[i].mw.iter().sum::<f64>()
    }
}

fn sorted_desc(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn annual_cf(hs: &HourlySolution, gen: &[f64], capacity: f64) -> f64 {
    if capacity > 0.0 {
        hs.hour_weight * gen.iter().sum::<f64>() / (capacity * HOURS_PER_YEAR)
    } else {
        0.0
    }
}

/// Subtraction order: vre by ascending curtailment rate, then storage net
/// discharge, then flexible demand added back, then dispatchables by
/// ascending capacity factor so the highest-CF plant ends at the bottom.
pub fn rldc(hs: &HourlySolution) -> Rldc {
    let mut order: Vec<(u8, f64, &str, Vec<f64>)> = Vec::new();
    for t in &hs.techs {
        let n = hs.hours();
        match t.kind {
            TechKind::Vre => {
                let g: f64 = t.generation.iter().sum();
                let c: f64 = t.curtailment.iter().sum();
                let rate = if g + c > 0.0 { c / (g + c) } else { 0.0 };
                order.push((0, rate, &t.name, t.generation.clone()));
            }
            TechKind::Storage => {
                let net = (0..n).map(|h| t.generation[h] - t.consumption[h]).collect();
                order.push((1, 0.0, &t.name, net));
            }
            TechKind::FlexDemand => {
                order.push((2, 0.0, &t.name, t.consumption.iter().map(|c| -c).collect()));
            }
            TechKind::Dispatchable => {
                let cf = annual_cf(hs, &t.generation, t.capacity);
                order.push((3, cf, &t.name, t.generation.clone()));
            }
        }
    }
    order.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(b.2)));
    let mut residual = hs.demand.clone();
    let mut curves = vec![Curve {
        label: "load".into(),
        mw: sorted_desc(&residual),
    }];
    for (_, _, name, series) in order {
        for (r, g) in residual.iter_mut().zip(&series) {
            *r -= g;
        }
        curves.push(Curve {
            label: name.to_string(),
            mw: sorted_desc(&residual),
        });
    }
    Rldc {
        year: hs.year,
        hour_weight: hs.hour_weight,
        curves,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pdc {
    pub year: i32,
    pub hour_weight: f64,
    /// Hourly prices sorted descending [$ /MWh].
    pub price: Vec<f64>,
    /// Running cost of each producing technology, as horizontal reference levels.
    pub references: Vec<(String, f64)>,
}

pub fn pdc(hs: &HourlySolution) -> Pdc {
    Pdc {
        year: hs.year,
        hour_weight: hs.hour_weight,
        price: sorted_desc(&hs.price),
        references: hs
            .techs
            .iter()
            .filter(|t| t.kind.is_generator())
            .map(|t| (t.name.clone(), t.variable_cost))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixRow {
    pub model: Model,
    pub year: i32,
    pub tech: String,
    pub kind: TechKind,
    pub capacity_mw: f64,
    pub generation_mwh: f64,
    /// Before curtailment and, for storage, before round-trip losses.
    pub pre_loss_mwh: f64,
    pub share: f64,
}

/// Per-MWh cost stack with the revenue overlays: `mv` is the market value
/// and `mv_shadow` adds the capacity-constraint shadow terms, so a tech in
/// equilibrium has `total == mv_shadow`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcoeRow {
    pub model: Model,
    pub year: i32,
    pub tech: String,
    pub capital: f64,
    pub running: f64,
    pub curtailment: f64,
    pub total: f64,
    pub mv: f64,
    pub mv_shadow: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixTables {
    pub iteration: usize,
    pub storage: bool,
    pub mix: Vec<MixRow>,
    pub lcoe: Vec<LcoeRow>,
}

fn per(x: f64, e: f64) -> f64 {
    if e > 0.0 {
        x / e
    } else {
        0.0
    }
}

fn hourly_mix(ms: &MarketStats) -> Vec<MixRow> {
    ms.techs
        .iter()
        .filter(|t| t.kind != TechKind::FlexDemand)
        .map(|t| {
            let pre = if t.kind == TechKind::Storage {
                // charged energy, i.e. what the store would deliver without losses
                t.consumption
            } else {
                t.pre_curtailment_energy
            };
            MixRow {
                model: Model::Hourly,
                year: ms.year,
                tech: t.name.clone(),
                kind: t.kind,
                capacity_mw: t.capacity,
                generation_mwh: t.energy,
                pre_loss_mwh: pre,
                share: ms.generation_share(&t.name),
            }
        })
        .collect()
}

/// Mixes of both models and annual LCOE stacks from the last iteration.
pub fn mix_tables(history: &[IterationDigest]) -> Result<MixTables> {
    let last = history
        .last()
        .ok_or_else(|| Error::Input("mix tables need at least one iteration".into()))?;
    let sol = &last.annual;
    let mut mix = Vec::new();
    let mut lcoe = Vec::new();
    for (yi, yr) in sol.years.iter().enumerate() {
        for (k, c) in sol.year_cells(yi).iter().enumerate() {
            let u = c.usable_generation();
            mix.push(MixRow {
                model: Model::Annual,
                year: yr.year,
                tech: c.tech.clone(),
                kind: c.kind,
                capacity_mw: c.capacity,
                generation_mwh: u,
                pre_loss_mwh: c.generation,
                share: sol.share(yi, k),
            });
            let capital = per(
                c.fixed_cost * c.capacity + c.adjustment_factor * c.fixed_cost * c.addition,
                c.generation,
            );
            let pre = capital + c.variable_cost;
            let total = if c.generation > 0.0 { pre * c.generation / u.max(f64::MIN_POSITIVE) } else { pre };
            let nu = if c.kind == TechKind::Dispatchable { yr.nu } else { 0.0 };
            let mv = yr.lambda + c.markup;
            let shadow = -per((c.omega - c.sigma + nu) * c.capacity + c.gamma * c.addition, u);
            lcoe.push(LcoeRow {
                model: Model::Annual,
                year: yr.year,
                tech: c.tech.clone(),
                capital,
                running: c.variable_cost,
                curtailment: total - pre,
                total,
                mv,
                mv_shadow: mv + shadow,
            });
        }
    }
    let mut storage = false;
    for ms in &last.stats {
        storage |= ms.techs.iter().any(|t| t.kind == TechKind::Storage);
        mix.extend(hourly_mix(ms));
    }
    Ok(MixTables {
        iteration: last.iteration,
        storage,
        mix,
        lcoe,
    })
}

/// LCOE stacks from a full hourly solution.
pub fn hourly_lcoe(hs: &HourlySolution) -> Vec<LcoeRow> {
    let w = hs.hour_weight;
    hs.techs
        .iter()
        .filter(|t| t.kind != TechKind::FlexDemand)
        .map(|t| {
            let g: f64 = t.generation.iter().sum();
            let c: f64 = t.curtailment.iter().sum();
            let energy = w * g;
            let pre = w * (g + c);
            let fixed = t.fixed_cost * t.capacity + t.energy_cost * t.energy_capacity + t.charge_cost * t.charge_capacity;
            let capital = per(fixed, pre);
            let total = per(fixed + t.variable_cost * pre, energy);
            let revenue: f64 = w * hs
                .price
                .iter()
                .enumerate()
                .map(|(h, p)| p * (t.generation[h] - t.consumption.get(h).copied().unwrap_or(0.0)))
                .sum::<f64>();
            let mv = per(revenue, energy);
            LcoeRow {
                model: Model::Hourly,
                year: hs.year,
                tech: t.name.clone(),
                capital,
                running: t.variable_cost,
                curtailment: if energy > 0.0 { total - capital - t.variable_cost } else { 0.0 },
                total: if energy > 0.0 { total } else { capital + t.variable_cost },
                mv,
                mv_shadow: mv - per((t.omega - t.zeta) * t.capacity, energy),
            }
        })
        .collect()
}

fn model_name(m: Model) -> &'static str {
    match m {
        Model::Annual => "annual",
        Model::Hourly => "hourly",
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_rldc(r: &Rldc, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(format!("rldc_{}.csv", r.year));
    let mut w = csv::Writer::from_path(&path)?;
    let mut header = vec!["rank".to_string(), "hours".to_string()];
    header.extend(r.curves.iter().map(|c| c.label.clone()));
    w.write_record(&header)?;
    for i in 0..r.curves[0].mw.len() {
        let mut row = vec![i.to_string(), (r.hour_weight * (i + 1) as f64).to_string()];
        row.extend(r.curves.iter().map(|c| c.mw[i].to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    out.push(path);

    let lo = r.curves.iter().flat_map(|c| c.mw.iter().copied()).fold(0.0, f64::min);
    let hi = r.curves.iter().flat_map(|c| c.mw.iter().copied()).fold(0.0, f64::max);
    let mut chart = Chart::new(&format!("Residual load duration curves {}", r.year), (0.0, HOURS_PER_YEAR), (lo, hi));
    for (i, c) in r.curves.iter().enumerate() {
        let pts: Vec<_> = c.mw.iter().enumerate().map(|(h, v)| (r.hour_weight * h as f64, *v)).collect();
        let label = if i == 0 { "load".to_string() } else { format!("- {}", c.label) };
        chart.polyline(&label, &pts, color(i), false);
    }
    let path = dir.join(format!("rldc_{}.svg", r.year));
    write_text(&path, &chart.finish("hours", "MW", true))?;
    out.push(path);
    Ok(())
}

fn write_pdc(p: &Pdc, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(format!("pdc_{}.csv", p.year));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["rank", "hours", "price"])?;
    for (i, v) in p.price.iter().enumerate() {
        w.write_record([i.to_string(), (p.hour_weight * (i + 1) as f64).to_string(), v.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    out.push(path);

    let path = dir.join(format!("pdc_{}_references.csv", p.year));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["tech", "running_cost"])?;
    for (t, c) in &p.references {
        w.write_record([t.clone(), c.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    out.push(path);

    // The scarcity hour would flatten everything else, so the axis stops at
    // the second-highest price or the highest reference level.
    let second = p.price.get(1).copied().unwrap_or(0.0);
    let top_ref = p.references.iter().map(|r| r.1).fold(0.0, f64::max);
    let lo = p.price.last().copied().unwrap_or(0.0).min(0.0);
    let hi = (second.max(top_ref) * 1.2).max(1.0);
    let mut chart = Chart::new(&format!("Price duration curve {}", p.year), (0.0, HOURS_PER_YEAR), (lo, hi));
    let pts: Vec<_> = p
        .price
        .iter()
        .enumerate()
        .map(|(h, v)| (p.hour_weight * h as f64, v.min(hi)))
        .collect();
    chart.polyline("price", &pts, color(0), false);
    for (i, (t, c)) in p.references.iter().enumerate() {
        chart.polyline(t, &[(0.0, *c), (HOURS_PER_YEAR, *c)], color(i + 1), true);
    }
    let path = dir.join(format!("pdc_{}.svg", p.year));
    write_text(&path, &chart.finish("hours", "$/MWh", true))?;
    out.push(path);
    Ok(())
}

fn stack_chart(t: &MixTables, model: Model, value: fn(&MixRow) -> f64, title: &str, unit: &str) -> String {
    let rows: Vec<&MixRow> = t.mix.iter().filter(|r| r.model == model && r.kind.is_generator()).collect();
    let mut years: Vec<i32> = rows.iter().map(|r| r.year).collect();
    years.dedup();
    let mut techs: Vec<&str> = Vec::new();
    for r in &rows {
        if !techs.contains(&r.tech.as_str()) {
            techs.push(&r.tech);
        }
    }
    let hi = years
        .iter()
        .map(|y| rows.iter().filter(|r| r.year == *y).map(|r| value(r).max(0.0)).sum::<f64>())
        .chain(rows.iter().map(|r| r.pre_loss_mwh).filter(|_| unit == "MWh"))
        .fold(0.0, f64::max);
    let mut chart = Chart::new(title, (-0.5, years.len() as f64 - 0.5), (0.0, hi.max(1.0) * 1.05));
    for (i, y) in years.iter().enumerate() {
        let mut base = 0.0;
        for (k, name) in techs.iter().enumerate() {
            let v = rows
                .iter()
                .find(|r| r.year == *y && r.tech == *name)
                .map(|r| value(r).max(0.0))
                .unwrap_or(0.0);
            chart.rect(i as f64 - 0.35, base, i as f64 + 0.35, base + v, color(k));
            chart.legend_entry(name, color(k));
            base += v;
        }
        chart.x_label_at(i as f64, &y.to_string());
    }
    if t.storage && unit == "MWh" && model == Model::Hourly {
        let pts: Vec<_> = years
            .iter()
            .enumerate()
            .map(|(i, y)| {
                let pre: f64 = rows
                    .iter()
                    .filter(|r| r.year == *y)
                    .map(|r| r.pre_loss_mwh)
                    .sum();
                (i as f64, pre)
            })
            .collect();
        chart.polyline("before storage loss and curtailment", &pts, "#000000", true);
    }
    chart.finish("year", unit, false)
}

fn lcoe_chart(rows: &[&LcoeRow], title: &str) -> String {
    let hi = rows
        .iter()
        .map(|r| r.total.max(r.mv).max(r.mv_shadow))
        .fold(0.0, f64::max);
    let lo = rows.iter().map(|r| r.mv.min(r.mv_shadow)).fold(0.0, f64::min);
    let mut chart = Chart::new(title, (-0.5, rows.len() as f64 - 0.5), (lo, hi.max(1.0) * 1.1));
    let parts: [(&str, fn(&LcoeRow) -> f64); 3] = [
        ("capital", |r| r.capital),
        ("running", |r| r.running),
        ("curtailment", |r| r.curtailment),
    ];
    for (i, r) in rows.iter().enumerate() {
        let mut base = 0.0;
        for (k, (label, f)) in parts.iter().enumerate() {
            let v = f(r).max(0.0);
            chart.rect(i as f64 - 0.35, base, i as f64 + 0.35, base + v, color(k));
            chart.legend_entry(label, color(k));
            base += v;
        }
        chart.x_label_at(i as f64, &r.tech);
    }
    let x = |i: usize| [(i as f64 - 0.4), (i as f64 + 0.4)];
    for (i, r) in rows.iter().enumerate() {
        let [a, b] = x(i);
        let label_mv = "market value";
        let label_sh = "market value + shadow";
        chart.polyline(label_mv, &[(a, r.mv), (b, r.mv)], "#000000", false);
        chart.polyline(label_sh, &[(a, r.mv_shadow), (b, r.mv_shadow)], "#d62728", true);
    }
    chart.finish("technology", "$/MWh", false)
}

fn write_mix(t: &MixTables, extra_lcoe: &[LcoeRow], dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join("mix.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["model", "year", "tech", "capacity_mw", "generation_mwh", "pre_loss_mwh", "share"])?;
    for r in &t.mix {
        w.write_record([
            model_name(r.model).to_string(),
            r.year.to_string(),
            r.tech.clone(),
            r.capacity_mw.to_string(),
            r.generation_mwh.to_string(),
            r.pre_loss_mwh.to_string(),
            r.share.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    out.push(path);

    let all: Vec<&LcoeRow> = t.lcoe.iter().chain(extra_lcoe).collect();
    let path = dir.join("lcoe.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record([
        "model",
        "year",
        "tech",
        "capital",
        "running",
        "curtailment",
        "total",
        "mv",
        "mv_shadow",
    ])?;
    for r in &all {
        w.write_record([
            model_name(r.model).to_string(),
            r.year.to_string(),
            r.tech.clone(),
            r.capital.to_string(),
            r.running.to_string(),
            r.curtailment.to_string(),
            r.total.to_string(),
            r.mv.to_string(),
            r.mv_shadow.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    out.push(path);

    for model in [Model::Annual, Model::Hourly] {
        let m = model_name(model);
        let charts = [
            (
                format!("generation_{m}.svg"),
                stack_chart(t, model, |r| r.generation_mwh, &format!("Generation ({m})"), "MWh"),
            ),
            (
                format!("capacity_{m}.svg"),
                stack_chart(t, model, |r| r.capacity_mw, &format!("Capacity ({m})"), "MW"),
            ),
        ];
        for (name, text) in charts {
            let path = dir.join(name);
            write_text(&path, &text)?;
            out.push(path);
        }
        let mut years: Vec<i32> = all.iter().filter(|r| r.model == model).map(|r| r.year).collect();
        years.dedup();
        for y in years {
            let rows: Vec<&LcoeRow> = all.iter().copied().filter(|r| r.model == model && r.year == y).collect();
            let path = dir.join(format!("lcoe_{m}_{y}.svg"));
            write_text(&path, &lcoe_chart(&rows, &format!("LCOE and market value ({m}, {y})")))?;
            out.push(path);
        }
    }
    Ok(())
}

/// Writes every report for the final iteration of a run into `dir`.
/// Returns the written paths in creation order.
pub fn write_report(state: &FinalState, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    let tables = mix_tables(&state.history)?;
    let mut extra = Vec::new();
    for hs in &state.last.hourly {
        write_rldc(&rldc(hs), dir, &mut out)?;
        write_pdc(&pdc(hs), dir, &mut out)?;
        extra.extend(hourly_lcoe(hs));
    }
    write_mix(&tables, &extra, dir, &mut out)?;
    Ok(out)
}
