//! Maximum 2-adic valuation of `s + delta` over a box of S-units `s` and a
//! list of shifts `delta`.
//!
//! Cells are evaluated on residues mod `2^64` (one wrapping multiply-add
//! and a trailing-zero count). A zero residue at the working width
//! escalates to 64 bits and then to exact arithmetic; cells whose exact
//! value is 0 are skipped and counted. The box is partitioned on the
//! exponent of its first prime; partitions merge with a commutative max, so
//! the report does not depend on the worker count or on checkpoint resumes.

use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{factorial, is_prime};
use crate::error::{Error, Result};
use crate::valuation::{low_u64, mask, nu};

/// Primes with inclusive exponent caps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SUnitBox {
    primes: Vec<u64>,
    caps: Vec<u32>,
}

impl SUnitBox {
    pub fn new(primes: Vec<u64>, caps: Vec<u32>) -> Result<Self> {
        if primes.is_empty() {
            return Err(Error::EmptyBox);
        }
        if primes.len() != caps.len() {
            return Err(Error::InvalidBox(format!(
                "{} primes but {} caps",
                primes.len(),
                caps.len()
            )));
        }
        if !primes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidBox("primes must be strictly increasing".into()));
        }
        if let Some(p) = primes.iter().find(|&&p| !is_prime(p)) {
            return Err(Error::InvalidBox(format!("{p} is not prime")));
        }
        Ok(SUnitBox { primes, caps })
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn caps(&self) -> &[u32] {
        &self.caps
    }

    pub fn cell_count(&self) -> u64 {
        self.caps.iter().map(|&c| c as u64 + 1).product()
    }

    pub fn value(&self, exponents: &[u32]) -> BigInt {
        self.primes
            .iter()
            .zip(exponents)
            .fold(BigInt::one(), |acc, (&p, &e)| acc * BigInt::from(p).pow(e))
    }

    /// `caps[i] >= other.caps[i]` over the same primes.
    pub fn contains_box(&self, other: &SUnitBox) -> bool {
        self.primes == other.primes && self.caps.iter().zip(&other.caps).all(|(a, b)| a >= b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shift {
    pub label: String,
    pub value: BigInt,
}

impl Shift {
    pub fn constant(v: i64) -> Self {
        Shift {
            label: format!("{v:+}"),
            value: BigInt::from(v),
        }
    }
}

/// `[+1, -1]`.
pub fn unit_shifts() -> Vec<Shift> {
    vec![Shift::constant(1), Shift::constant(-1)]
}

/// `+1+m!, +1-m!, -1+m!, -1-m!` for each `m` in `lo..=hi`, `m`-major.
pub fn unit_factorial_shifts(lo: u64, hi: u64) -> Vec<Shift> {
    let mut out = Vec::with_capacity(4 * (hi.saturating_sub(lo) + 1) as usize);
    for m in lo..=hi {
        let f = BigInt::from(factorial(m));
        for (one, fs) in [(1i64, '+'), (1, '-'), (-1, '+'), (-1, '-')] {
            let value = if fs == '+' {
                BigInt::from(one) + &f
            } else {
                BigInt::from(one) - &f
            };
            out.push(Shift {
                label: format!("{one:+}{fs}{m}!"),
                value,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// starting residue width in bits: 24, 32 or 64
    pub width: u32,
    pub workers: usize,
    /// partitions per checkpoint
    pub batch: usize,
    /// leave out the cell `s = 1` (all exponents zero)
    #[serde(default)]
    pub exclude_unit: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            width: 32,
            workers: 1,
            batch: 8,
            exclude_unit: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanArgmax {
    pub exponents: Vec<u32>,
    pub shift_index: usize,
    pub shift: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanReport {
    pub primes: Vec<u64>,
    pub caps: Vec<u32>,
    pub shift_count: usize,
    pub width: u32,
    pub max_val: u64,
    pub argmax: Option<ScanArgmax>,
    pub count_scanned: u64,
    pub count_skipped_zero: u64,
    /// cells left out because `s = 1` was excluded
    #[serde(default)]
    pub count_excluded_unit: u64,
    pub width_escalations: u64,
}

/// Running state of a scan over some set of partitions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partial {
    /// `(value, (first exponent, inner index, shift index))`
    best: Option<(u64, (u32, usize, usize))>,
    scanned: u64,
    skipped: u64,
    escalations: u64,
    #[serde(default)]
    excluded: u64,
}

impl Partial {
    fn offer(&mut self, val: u64, key: (u32, usize, usize)) {
        match self.best {
            Some((bv, bk)) if bv > val || (bv == val && bk <= key) => {}
            _ => self.best = Some((val, key)),
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        if let Some((v, k)) = other.best {
            self.offer(v, k);
        }
        self.scanned += other.scanned;
        self.skipped += other.skipped;
        self.escalations += other.escalations;
        self.excluded += other.excluded;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellValue {
    Nu2(u64),
    Zero,
}

/// Precomputed residue tables for one (box, shifts) pair.
pub struct ScanPlan<'a> {
    sbox: &'a SUnitBox,
    shifts: &'a [Shift],
    shift_res: Vec<u64>,
    /// `p_0^a mod 2^64`
    head: Vec<u64>,
    /// products over the remaining primes, lexicographic in their exponents
    inner: Vec<u64>,
    width: u32,
    exclude_unit: bool,
}

impl<'a> ScanPlan<'a> {
    pub fn new(sbox: &'a SUnitBox, shifts: &'a [Shift], width: u32) -> Result<Self> {
        if shifts.is_empty() {
            return Err(Error::EmptyBox);
        }
        if !matches!(width, 24 | 32 | 64) {
            return Err(Error::ParameterOutOfRange(format!(
                "width {width} not in {{24, 32, 64}}"
            )));
        }
        let powers = |p: u64, cap: u32| -> Vec<u64> {
            let mut v = Vec::with_capacity(cap as usize + 1);
            let mut x = 1u64;
            for _ in 0..=cap {
                v.push(x);
                x = x.wrapping_mul(p);
            }
            v
        };
        let head = powers(sbox.primes[0], sbox.caps[0]);
        let mut inner = vec![1u64];
        for (&p, &cap) in sbox.primes.iter().zip(&sbox.caps).skip(1) {
            let pw = powers(p, cap);
            inner = inner
                .iter()
                .flat_map(|&x| pw.iter().map(move |&y| x.wrapping_mul(y)))
                .collect();
        }
        Ok(ScanPlan {
            sbox,
            shifts,
            shift_res: shifts.iter().map(|s| low_u64(&s.value)).collect(),
            head,
            inner,
            width,
            exclude_unit: false,
        })
    }

    pub fn excluding_unit(mut self, exclude: bool) -> Self {
        self.exclude_unit = exclude;
        self
    }

    pub fn partitions(&self) -> usize {
        self.head.len()
    }

    /// Exponent vector of cell `(a, inner index)`.
    pub fn exponents(&self, a: u32, inner_index: usize) -> Vec<u32> {
        let mut rest = Vec::with_capacity(self.sbox.primes.len() - 1);
        let mut idx = inner_index;
        for &cap in self.sbox.caps.iter().skip(1).rev() {
            let base = cap as usize + 1;
            rest.push((idx % base) as u32);
            idx /= base;
        }
        rest.reverse();
        let mut e = vec![a];
        e.extend(rest);
        e
    }

    fn inner_index(&self, exponents: &[u32]) -> usize {
        exponents
            .iter()
            .zip(&self.sbox.caps)
            .skip(1)
            .fold(0usize, |acc, (&e, &cap)| acc * (cap as usize + 1) + e as usize)
    }

    fn exact_value(&self, a: u32, inner_index: usize, shift_index: usize) -> BigInt {
        self.sbox.value(&self.exponents(a, inner_index)) + &self.shifts[shift_index].value
    }

    /// Escalation past the working width: 64 bits, then exact.
    #[cold]
    fn escalate(&self, v: u64, a: u32, j: usize, si: usize, part: &mut Partial) -> CellValue {
        if self.width < 64 {
            part.escalations += 1;
            if v != 0 {
                return CellValue::Nu2(v.trailing_zeros() as u64);
            }
        }
        part.escalations += 1;
        let exact = self.exact_value(a, j, si);
        match nu(&exact, 2) {
            Ok(e) => CellValue::Nu2(e),
            Err(_) => CellValue::Zero,
        }
    }

    pub fn scan_partition(&self, a: u32) -> Partial {
        let mut part = Partial::default();
        let m = mask(self.width);
        let head = self.head[a as usize];
        let prod: Vec<u64> = self.inner.iter().map(|&x| head.wrapping_mul(x)).collect();
        let mut best_val = 0u64;
        let mut best_key: Option<(usize, usize)> = None;
        for (si, &sh) in self.shift_res.iter().enumerate() {
            for (j, &s) in prod.iter().enumerate() {
                if self.exclude_unit && a == 0 && j == 0 {
                    part.excluded += 1;
                    continue;
                }
                let v = s.wrapping_add(sh);
                let r = v & m;
                let val = if r != 0 {
                    r.trailing_zeros() as u64
                } else {
                    match self.escalate(v, a, j, si, &mut part) {
                        CellValue::Nu2(e) => e,
                        CellValue::Zero => {
                            part.skipped += 1;
                            continue;
                        }
                    }
                };
                if val >= best_val {
                    let better = match best_key {
                        None => true,
                        Some(k) => val > best_val || (j, si) < k,
                    };
                    if better {
                        best_val = val;
                        best_key = Some((j, si));
                    }
                }
            }
        }
        part.scanned = (prod.len() * self.shift_res.len()) as u64;
        part.best = best_key.map(|(j, si)| (best_val, (a, j, si)));
        part
    }

    /// The value a scan assigns to one cell, through the same truncated path.
    pub fn evaluate_cell(&self, exponents: &[u32], shift_index: usize) -> CellValue {
        let a = exponents[0];
        let j = self.inner_index(exponents);
        let v = self.head[a as usize]
            .wrapping_mul(self.inner[j])
            .wrapping_add(self.shift_res[shift_index]);
        let r = v & mask(self.width);
        if r != 0 {
            CellValue::Nu2(r.trailing_zeros() as u64)
        } else {
            self.escalate(v, a, j, shift_index, &mut Partial::default())
        }
    }

    fn report(&self, part: &Partial) -> Result<ScanReport> {
        let argmax = part.best.map(|(_, (a, j, si))| ScanArgmax {
            exponents: self.exponents(a, j),
            shift_index: si,
            shift: self.shifts[si].label.clone(),
        });
        let report = ScanReport {
            primes: self.sbox.primes.clone(),
            caps: self.sbox.caps.clone(),
            shift_count: self.shifts.len(),
            width: self.width,
            max_val: part.best.map_or(0, |b| b.0),
            argmax,
            count_scanned: part.scanned,
            count_skipped_zero: part.skipped,
            width_escalations: part.escalations,
            count_excluded_unit: part.excluded,
        };
        if !report.verify(self.sbox, self.shifts) {
            return Err(Error::Domain("argmax failed exact re-verification".into()));
        }
        Ok(report)
    }

    fn fingerprint(&self) -> String {
        let labels: Vec<&str> = self.shifts.iter().map(|s| s.label.as_str()).collect();
        format!(
            "primes={:?} caps={:?} width={} exclude_unit={} shifts={}:{}",
            self.sbox.primes,
            self.sbox.caps,
            self.width,
            self.exclude_unit,
            self.shifts.len(),
            labels.join(",")
        )
    }
}

impl ScanReport {
    /// Exact re-check that the argmax attains `max_val`.
    pub fn verify(&self, sbox: &SUnitBox, shifts: &[Shift]) -> bool {
        match &self.argmax {
            None => self.count_scanned == self.count_skipped_zero + self.count_excluded_unit,
            Some(am) => {
                let v = sbox.value(&am.exponents) + &shifts[am.shift_index].value;
                nu(&v, 2).ok() == Some(self.max_val)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Checkpoint {
    fingerprint: String,
    completed_partitions: usize,
    running: Partial,
}

fn load_checkpoint(path: &Path, fingerprint: &str) -> Result<Option<Checkpoint>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(path).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let cp: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::Checkpoint(e.to_string()))?;
    if cp.fingerprint != fingerprint {
        return Err(Error::Checkpoint(format!(
            "{} belongs to a different scan",
            path.display()
        )));
    }
    Ok(Some(cp))
}

fn store_checkpoint(path: &Path, cp: &Checkpoint) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let text = serde_json::to_string_pretty(cp).map_err(|e| Error::Checkpoint(e.to_string()))?;
    fs::write(&tmp, text).map_err(|e| Error::Checkpoint(e.to_string()))?;
    fs::rename(&tmp, path).map_err(|e| Error::Checkpoint(e.to_string()))
}

/// Resumable scan driver.
pub struct Scan<'a> {
    plan: ScanPlan<'a>,
    options: ScanOptions,
    checkpoint: Option<PathBuf>,
}

impl<'a> Scan<'a> {
    pub fn new(sbox: &'a SUnitBox, shifts: &'a [Shift], options: ScanOptions) -> Result<Self> {
        Ok(Scan {
            plan: ScanPlan::new(sbox, shifts, options.width)?.excluding_unit(options.exclude_unit),
            options,
            checkpoint: None,
        })
    }

    pub fn with_checkpoint(mut self, path: impl Into<PathBuf>) -> Self {
        self.checkpoint = Some(path.into());
        self
    }

    pub fn plan(&self) -> &ScanPlan<'a> {
        &self.plan
    }

    /// Runs the scan; `stop_after` limits the number of batches (for
    /// simulating an interrupted run).
    pub fn run_batches(&self, stop_after: Option<usize>) -> Result<Option<ScanReport>> {
        let fingerprint = self.plan.fingerprint();
        let (mut done, mut running) = match &self.checkpoint {
            Some(path) => match load_checkpoint(path, &fingerprint)? {
                Some(cp) => (cp.completed_partitions, cp.running),
                None => (0, Partial::default()),
            },
            None => (0, Partial::default()),
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.options.workers.max(1))
            .build()
            .map_err(|e| Error::Domain(e.to_string()))?;
        let total = self.plan.partitions();
        let batch = self.options.batch.max(1);
        let mut batches = 0;
        while done < total {
            if stop_after.is_some_and(|s| batches >= s) {
                return Ok(None);
            }
            let end = (done + batch).min(total);
            let chunk = pool.install(|| {
                (done..end)
                    .into_par_iter()
                    .map(|a| self.plan.scan_partition(a as u32))
                    .reduce(Partial::default, Partial::merge)
            });
            running = running.merge(chunk);
            done = end;
            batches += 1;
            if let Some(path) = &self.checkpoint {
                store_checkpoint(
                    path,
                    &Checkpoint {
                        fingerprint: fingerprint.clone(),
                        completed_partitions: done,
                        running: running.clone(),
                    },
                )?;
            }
        }
        self.plan.report(&running).map(Some)
    }

    pub fn run(&self) -> Result<ScanReport> {
        Ok(self.run_batches(None)?.expect("unbounded run completes"))
    }
}

/// `max* nu_2(s + delta)` over `s` in the box and `delta` in `shifts`.
pub fn max_shifted_nu2(sbox: &SUnitBox, shifts: &[Shift], options: ScanOptions) -> Result<ScanReport> {
    Scan::new(sbox, shifts, options)?.run()
}

/// Reference implementation over exact integers; only for small boxes.
pub fn max_shifted_nu2_exact(sbox: &SUnitBox, shifts: &[Shift]) -> (u64, Option<(Vec<u32>, usize)>, u64) {
    let mut best: Option<(u64, Vec<u32>, usize)> = None;
    let mut skipped = 0;
    let mut exps = vec![0u32; sbox.primes.len()];
    loop {
        let s = sbox.value(&exps);
        for (si, sh) in shifts.iter().enumerate() {
            let v = &s + &sh.value;
            if v.is_zero() {
                skipped += 1;
                continue;
            }
            let e = nu(&v, 2).unwrap();
            let better = match &best {
                None => true,
                Some((bv, bx, bs)) => e > *bv || (e == *bv && (&exps, si) < (bx, *bs)),
            };
            if better {
                best = Some((e, exps.clone(), si));
            }
        }
        // odometer, last prime fastest
        let mut i = exps.len();
        loop {
            if i == 0 {
                return match best {
                    Some((v, x, s)) => (v, Some((x, s)), skipped),
                    None => (0, None, skipped),
                };
            }
            i -= 1;
            if exps[i] < sbox.caps[i] {
                exps[i] += 1;
                break;
            }
            exps[i] = 0;
        }
    }
}
