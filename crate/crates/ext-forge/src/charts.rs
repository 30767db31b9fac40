//! Ext chart data, JSON fixtures, ascii/svg rendering and chart diffs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Generator (s, t, ordinal).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GenName(pub i64, pub i64, pub usize);

impl GenName {
    pub fn s(self) -> i64 {
        self.0
    }
    pub fn t(self) -> i64 {
        self.1
    }
    pub fn stem(self) -> i64 {
        self.1 - self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HKind {
    #[serde(rename = "h0")]
    H0,
    #[serde(rename = "h1")]
    H1,
    #[serde(rename = "h2")]
    H2,
}

impl HKind {
    pub fn index(self) -> u8 {
        match self {
            HKind::H0 => 0,
            HKind::H1 => 1,
            HKind::H2 => 2,
        }
    }

    /// Internal degree of h_i.
    pub fn degree(self) -> i64 {
        1 << self.index()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HKind::H0 => "h0",
            HKind::H1 => "h1",
            HKind::H2 => "h2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub max_s: i64,
    pub max_t: i64,
    /// Inclusive trusted stem range [lo, hi].
    pub stems: [i64; 2],
}

impl Region {
    pub fn contains(&self, s: i64, t: i64) -> bool {
        s >= 0 && s <= self.max_s && t <= self.max_t && t - s >= self.stems[0] && t - s <= self.stems[1]
    }

    pub fn intersect(&self, other: &Region) -> Option<Region> {
        let r = Region {
            max_s: self.max_s.min(other.max_s),
            max_t: self.max_t.min(other.max_t),
            stems: [self.stems[0].max(other.stems[0]), self.stems[1].min(other.stems[1])],
        };
        (r.max_s >= 0 && r.stems[0] <= r.stems[1] && r.max_t >= r.stems[0]).then_some(r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtChart {
    pub algebra: String,
    pub module: String,
    pub region: Region,
    /// (s, t, rank), sorted.
    pub entries: Vec<(i64, i64, usize)>,
    pub lines: Vec<(HKind, GenName, GenName)>,
}

/// An h0-chain rooted at a filtration-zero generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tower {
    pub root: GenName,
    /// Number of nonzero classes g, h0 g, h0^2 g, ...
    pub length: usize,
    /// The chain is still alive at the top of the certified s-range.
    pub reaches_top: bool,
}

impl ExtChart {
    pub fn rank(&self, s: i64, t: i64) -> usize {
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&(s, t)))
            .map(|i| self.entries[i].2)
            .unwrap_or(0)
    }

    /// Rank at (stem, s).
    pub fn rank_at_stem(&self, stem: i64, s: i64) -> usize {
        self.rank(s, stem + s)
    }

    pub fn lines_of(&self, kind: HKind) -> impl Iterator<Item = (GenName, GenName)> + '_ {
        self.lines.iter().filter(move |l| l.0 == kind).map(|l| (l.1, l.2))
    }

    /// Applies h_i to a class given as a set of generators at (s, t).
    pub fn multiply(&self, kind: HKind, s: i64, t: i64, class: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for (a, b) in self.lines_of(kind) {
            if a.0 == s && a.1 == t && class.contains(&a.2) && !out.remove(&b.2) {
                out.insert(b.2);
            }
        }
        out
    }

    pub fn h0_towers(&self, stem: i64) -> Vec<Tower> {
        let mut out = Vec::new();
        for i in 0..self.rank(0, stem) {
            let mut class: BTreeSet<usize> = [i].into_iter().collect();
            let (mut s, mut t) = (0, stem);
            let mut length = 0;
            while !class.is_empty() && self.region.contains(s, t) {
                length += 1;
                class = self.multiply(HKind::H0, s, t, &class);
                s += 1;
                t += 1;
            }
            let reaches_top = length as i64 == self.region.max_s + 1;
            out.push(Tower { root: GenName(0, stem, i), length, reaches_top });
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let mut c: ExtChart = serde_json::from_str(s)?;
        c.normalize();
        Ok(c)
    }

    /// Sorts entries and lines; drops zero ranks.
    pub fn normalize(&mut self) {
        self.entries.retain(|e| e.2 > 0);
        self.entries.sort();
        self.lines.sort();
    }

    /// Same data restricted to a smaller region.
    pub fn restrict(&self, region: Region) -> ExtChart {
        let mut c = ExtChart {
            algebra: self.algebra.clone(),
            module: self.module.clone(),
            region,
            entries: self.entries.iter().copied().filter(|e| region.contains(e.0, e.1)).collect(),
            lines: self
                .lines
                .iter()
                .copied()
                .filter(|l| region.contains(l.1 .0, l.1 .1) && region.contains(l.2 .0, l.2 .1))
                .collect(),
        };
        c.normalize();
        c
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartFixture {
    pub name: String,
    /// Which figure the chart corresponds to and how it was cross-checked.
    pub provenance: String,
    /// Exact command that regenerates the chart.
    pub command: String,
    #[serde(flatten)]
    pub chart: ExtChart,
}

impl ChartFixture {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut f: ChartFixture = serde_json::from_str(&text)?;
        if f.provenance.trim().is_empty() || f.command.trim().is_empty() {
            return Err(Error::Contract(format!("fixture {} lacks provenance or command", f.name)));
        }
        f.chart.normalize();
        Ok(f)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiffEntry {
    Rank { s: i64, t: i64, chart: usize, fixture: usize },
    Line { kind: HKind, source: GenName, target: GenName, in_chart: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffReport {
    pub region: Region,
    pub entries: Vec<DiffEntry>,
}

impl DiffReport {
    pub fn is_match(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Rank and line mismatches on the intersection of the two certified regions.
pub fn compare(chart: &ExtChart, fixture: &ExtChart) -> Result<DiffReport> {
    let region = chart
        .region
        .intersect(&fixture.region)
        .ok_or_else(|| Error::Contract("chart and fixture regions are disjoint".into()))?;
    let a = chart.restrict(region);
    let b = fixture.restrict(region);
    let mut entries = Vec::new();
    let mut keys: BTreeSet<(i64, i64)> = BTreeSet::new();
    keys.extend(a.entries.iter().map(|e| (e.0, e.1)));
    keys.extend(b.entries.iter().map(|e| (e.0, e.1)));
    for (s, t) in keys {
        let (x, y) = (a.rank(s, t), b.rank(s, t));
        if x != y {
            entries.push(DiffEntry::Rank { s, t, chart: x, fixture: y });
        }
    }
    let la: BTreeSet<_> = a.lines.iter().copied().collect();
    let lb: BTreeSet<_> = b.lines.iter().copied().collect();
    for l in la.symmetric_difference(&lb) {
        entries.push(DiffEntry::Line { kind: l.0, source: l.1, target: l.2, in_chart: la.contains(l) });
    }
    Ok(DiffReport { region, entries })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Ascii,
    Svg,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ascii" => Ok(Format::Ascii),
            "svg" => Ok(Format::Svg),
            o => Err(Error::Config(format!("unknown chart format {o:?}"))),
        }
    }
}

pub fn render(chart: &ExtChart, format: Format) -> String {
    match format {
        Format::Ascii => render_ascii(chart),
        Format::Svg => render_svg(chart),
    }
}

const CELL: usize = 4;

/// Stems across, s upward. Dots: `o` (rank 1) or the rank digit; `|` marks
/// an h0 line, `/` an h1 line and `-` runs an h2 line in the gap row above.
fn render_ascii(chart: &ExtChart) -> String {
    let [lo, hi] = chart.region.stems;
    let max_s = chart.region.max_s.max(0);
    let width = ((hi - lo + 1).max(1) as usize) * CELL;
    let rows = (2 * max_s + 1) as usize;
    let mut grid = vec![vec![' '; width]; rows];
    let col = |stem: i64| ((stem - lo) as usize) * CELL + 1;
    let row = |s: i64| rows - 1 - 2 * s as usize;
    for &(s, t, r) in &chart.entries {
        let stem = t - s;
        if stem < lo || stem > hi || s > max_s {
            continue;
        }
        grid[row(s)][col(stem)] = if r == 1 { 'o' } else { std::char::from_digit(r.min(9) as u32, 10).unwrap() };
    }
    for &(kind, a, b) in &chart.lines {
        if a.stem() < lo || b.stem() > hi || b.0 > max_s {
            continue;
        }
        let gap = row(a.0) - 1;
        let c = col(a.stem());
        match kind {
            HKind::H0 => grid[gap][c] = '|',
            HKind::H1 => grid[gap][c + 2.min(width - 1 - c)] = '/',
            HKind::H2 => {
                for k in 1..3 * CELL {
                    if c + k < width && grid[gap][c + k] == ' ' {
                        grid[gap][c + k] = '-';
                    }
                }
            }
        }
    }
    let mut out = String::new();
    writeln!(out, "{} Ext chart of {} (x = t-s, y = s)", chart.algebra, chart.module).unwrap();
    for (k, line) in grid.iter().enumerate() {
        let label = if (rows - 1 - k).is_multiple_of(2) { format!("{:>3} ", (rows - 1 - k) / 2) } else { "    ".into() };
        let text: String = line.iter().collect();
        writeln!(out, "{label}{}", text.trim_end()).unwrap();
    }
    let mut axis = String::from("    ");
    for stem in lo..=hi {
        let lab = if stem % 2 == 0 { format!("{stem:<width$}", width = CELL) } else { " ".repeat(CELL) };
        axis.push_str(&lab);
    }
    writeln!(out, "{}", axis.trim_end()).unwrap();
    out
}

fn render_svg(chart: &ExtChart) -> String {
    let [lo, hi] = chart.region.stems;
    let max_s = chart.region.max_s.max(0);
    let unit = 24.0;
    let margin = 30.0;
    let w = (hi - lo + 1).max(1) as f64 * unit + 2.0 * margin;
    let h = (max_s + 1) as f64 * unit + 2.0 * margin;
    let px = |stem: f64| margin + (stem - lo as f64 + 0.5) * unit;
    let py = |s: f64| h - margin - (s + 0.5) * unit;
    // Dot position for ordinal i of rank r at (stem, s).
    let spread = |i: usize, r: usize| -> f64 { (i as f64 - (r as f64 - 1.0) / 2.0) * 5.0 };
    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#).unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<line x1="{m:.1}" y1="{y:.1}" x2="{x2:.1}" y2="{y:.1}" stroke="black"/>"#,
        m = margin,
        y = h - margin,
        x2 = w - margin
    )
    .unwrap();
    writeln!(out, r#"<line x1="{m:.1}" y1="{m:.1}" x2="{m:.1}" y2="{y:.1}" stroke="black"/>"#, m = margin, y = h - margin).unwrap();
    for stem in lo..=hi {
        if stem % 2 == 0 {
            writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="9" text-anchor="middle">{stem}</text>"#, px(stem as f64), h - margin + 12.0).unwrap();
        }
    }
    for s in 0..=max_s {
        writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="9" text-anchor="end">{s}</text>"#, margin - 4.0, py(s as f64) + 3.0).unwrap();
    }
    let ranks: BTreeMap<(i64, i64), usize> = chart.entries.iter().map(|e| ((e.0, e.1), e.2)).collect();
    let pos = |g: GenName| -> (f64, f64) {
        let r = ranks.get(&(g.0, g.1)).copied().unwrap_or(1);
        (px(g.stem() as f64) + spread(g.2, r), py(g.0 as f64))
    };
    for &(kind, a, b) in &chart.lines {
        let (x1, y1) = pos(a);
        let (x2, y2) = pos(b);
        let color = match kind {
            HKind::H0 => "black",
            HKind::H1 => "blue",
            HKind::H2 => "green",
        };
        writeln!(out, r#"<line class="{}" x1="{x1:.1}" y1="{y1:.1}" x2="{x2:.1}" y2="{y2:.1}" stroke="{color}"/>"#, kind.as_str()).unwrap();
    }
    for &(s, t, r) in &chart.entries {
        for i in 0..r {
            let (x, y) = pos(GenName(s, t, i));
            writeln!(out, r#"<circle cx="{x:.1}" cy="{y:.1}" r="2.5" fill="black"/>"#).unwrap();
        }
    }
    writeln!(out, "</svg>").unwrap();
    out
}
