//! Published reference data for the Cullen/Woodall instance, kept verbatim
//! (including typesetting artifacts), and helpers that compare computed
//! results against it.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};

use crate::arith::factorial;
use crate::solve::{Family, SolveReport};

/// One published lift constant: `lift(p, t, n0, k)` as printed.
#[derive(Debug, Clone, Copy)]
pub struct LiftFixture {
    pub p: u64,
    pub t: i64,
    pub n0: u64,
    pub k: u32,
    pub printed: &'static str,
}

const fn lf(p: u64, t: i64, n0: u64, k: u32, printed: &'static str) -> LiftFixture {
    LiftFixture { p, t, n0, k, printed }
}

pub const LIFT_FIXTURES: &[LiftFixture] = &[
    lf(
        3,
        0,
        1,
        124,
        "14096601226371925780354191137048938941051110799238395669157",
    ),
    lf(
        3,
        0,
        2,
        124,
        "131916531426323976413079495561663150351720433293832571666642",
    ),
    lf(
        5,
        0,
        3,
        99,
        "3402055567449187211072479894744526992631911429806123056986882546322203",
    ),
    lf(
        5,
        0,
        4,
        99,
        "5860318539126309542028901497378642627938750361916774422262903402988764",
    ),
    lf(
        5,
        0,
        6,
        99,
        "6211271813369046855320209665842033651445457938030806323641242413003566",
    ),
    lf(
        5,
        0,
        17,
        99,
        "1900239201139363261324476300084028074211927656029119121314580491907717",
    ),
    lf(
        7,
        0,
        5,
        79,
        "23376667116957912273395168878053596583934978592913658754638298386469",
    ),
    lf(
        7,
        0,
        6,
        79,
        "26944746689754581236007271009151875823474002652201195796068635289134",
    ),
    lf(
        7,
        0,
        10,
        79,
        "24069582378334816208567848014057127858216459565384781083488608965992",
    ),
    lf(
        7,
        0,
        26,
        79,
        "6004003289610317916795511974189307812131311913908480006270103623040",
    ),
    lf(
        7,
        0,
        27,
        79,
        "9572082862406986879407614105287587051670335973196017047700440525705",
    ),
    lf(
        7,
        0,
        31,
        79,
        "6696918550987221851968191110192839086412792886379602335120414202563",
    ),
    lf(
        3,
        2,
        4,
        126,
        "1324117109863992278171562286849551012905296843274331852235486",
    ),
    lf(
        3,
        2,
        5,
        126,
        "2024168377236220040978157856035277257188964269091189786706895",
    ),
    lf(
        5,
        2,
        7,
        99,
        "50556828220234104829713905612151729929047533964652111403956962145639\n\t67",
    ),
    lf(
        5,
        2,
        13,
        99,
        "246611946565139989425565633613382073939085689370031037905766823665953",
    ),
    lf(
        5,
        2,
        14,
        99,
        "27048749182422623203819872362474977092459246214806824031817876803325\n\t14",
    ),
    lf(
        5,
        2,
        16,
        99,
        "30558281924849996336732954047108887327526321975947143045601266903473\n\t16",
    ),
    lf(
        7,
        2,
        2,
        79,
        "3070945089242253569511128531703 7993482895779452876147449227324975278",
    ),
    lf(
        7,
        2,
        4,
        79,
        "4084723421753861202636449976\n\t25665865881992651094052930276211831026",
    ),
    lf(
        7,
        2,
        15,
        79,
        "2157106343186897994855204068753 0035249121277125785855969465402463679",
    ),
    lf(
        7,
        2,
        23,
        79,
        "13336787065074941338511628413173 704711092112773870968700859130211849",
    ),
    lf(
        7,
        2,
        25,
        79,
        "177811361695229804768633019014899 54637685659330099231678644406594455",
    ),
    lf(
        7,
        2,
        36,
        79,
        "4198399604521385591952383783665746 477317610446780677221097207700250",
    ),
];

impl LiftFixture {
    /// Printed digits with embedded whitespace removed.
    pub fn normalized(&self) -> String {
        self.printed.chars().filter(|c| !c.is_whitespace()).collect()
    }

    pub fn has_typesetting_artifact(&self) -> bool {
        self.printed.chars().any(char::is_whitespace)
    }

    pub fn value(&self) -> BigUint {
        self.normalized().parse().expect("fixture digits")
    }
}

/// `(p, t)` and the published residues `n0` in `[0, p(p-1))`.
pub const RESIDUE_SETS: &[(u64, i64, &[u64])] = &[
    (3, 0, &[1, 2]),
    (5, 0, &[3, 4, 6, 17]),
    (7, 0, &[5, 6, 10, 26, 27, 31]),
    (3, 2, &[4, 5]),
    (5, 2, &[7, 13, 14, 16]),
    (7, 2, &[2, 4, 15, 23, 25, 36]),
];

/// `(m, p, nu_p(m!))`.
pub const LEGENDRE: &[(u64, u64, u64)] = &[(500, 3, 247), (500, 5, 124), (500, 7, 82), (500, 2, 494)];

/// `n < 10^58` throughout the valuation claims.
pub const LIMIT_EXPONENT: u32 = 58;

/// `(p, t, c)`: `nu_p(n 2^n + 1 - t) < c` for every `n < 10^58`.
pub const PURE_CLAIMS: &[(u64, i64, u32)] = &[(3, 0, 124), (5, 0, 99), (7, 0, 79), (3, 2, 126), (5, 2, 99), (7, 2, 79)];

/// A family with a signed factorial: `u_n + eps m!` for `m` in `[2, 500]`.
#[derive(Debug, Clone, Copy)]
pub struct CaseClaim {
    pub label: &'static str,
    pub family: Family,
    pub eps: i8,
    /// `(p, c)`: `nu_p < c`
    pub caps: [(u64, u32); 3],
}

pub const CASE_CLAIMS: &[CaseClaim] = &[
    CaseClaim {
        label: "C_n - m!",
        family: Family::Cullen,
        eps: -1,
        caps: [(3, 126), (5, 100), (7, 80)],
    },
    CaseClaim {
        label: "W_n + m!",
        family: Family::Woodall,
        eps: 1,
        caps: [(3, 127), (5, 100), (7, 80)],
    },
    CaseClaim {
        label: "C_n + m!",
        family: Family::Cullen,
        eps: 1,
        caps: [(3, 129), (5, 100), (7, 80)],
    },
    CaseClaim {
        label: "W_n - m!",
        family: Family::Woodall,
        eps: -1,
        caps: [(3, 129), (5, 100), (7, 80)],
    },
];

pub const CASE_M_RANGE: (u64, u64) = (2, 500);

/// `max* nu_2(3^a 5^b 7^c +- 1) <= 19` over `a <= 125, b <= 99, c <= 79`.
pub const SCAN_A_CAPS: [u32; 3] = [125, 99, 79];
pub const SCAN_A_MAX: u64 = 19;

/// `max* nu_2(3^a 5^b 7^c +- 1 +- m!) < 30` over `m` in `[2, 500]`,
/// `a <= 130, b <= 100, c <= 80`.
pub const SCAN_B_CAPS: [u32; 3] = [130, 100, 80];
pub const SCAN_B_M_RANGE: (u64, u64) = (2, 500);
pub const SCAN_B_BOUND: u64 = 30;

pub const SOLVE_N_MAX: u64 = 30;
pub const SOLVE_M_RANGE: (u64, u64) = (2, 500);
pub const SOLVE_CAPS: [u32; 3] = [130, 100, 80];
pub const HEADLINE_N: u64 = 8;
pub const HEADLINE_M: u64 = 7;

/// The published intersection set, verbatim.
pub const VALUE_SET_PRINTED: &str = "-25,-21,-7,-5-3,-1,3,5,7,9,15,21,25,27,49,63,135,175,729,2025,5103";

/// Parses the printed set, reading a run such as `-5-3` as the separate
/// values `-5` and `-3`.
pub fn parse_value_set(printed: &str) -> Vec<i64> {
    let mut out = Vec::new();
    for item in printed.split(',') {
        let item = item.trim();
        let mut start = 0;
        for (i, ch) in item.char_indices().skip(1) {
            if ch == '-' || ch == '+' {
                out.push(item[start..i].parse().expect("set element"));
                start = i;
            }
        }
        out.push(item[start..].parse().expect("set element"));
    }
    out.sort();
    out
}

pub fn published_value_set() -> Vec<i64> {
    parse_value_set(VALUE_SET_PRINTED)
}

/// One row of the published solution table.
#[derive(Debug, Clone, Copy)]
pub struct TableRow {
    pub printed_value: &'static str,
    /// value of the printed expression
    pub value: i64,
    /// identities and their degeneracy marks
    pub identities: &'static [(&'static str, bool)],
}

const fn row(printed_value: &'static str, value: i64, identities: &'static [(&'static str, bool)]) -> TableRow {
    TableRow {
        printed_value,
        value,
        identities,
    }
}

pub const SOLUTION_TABLE: &[TableRow] = &[
    row(
        "1",
        1,
        &[("W_0+2!", false), ("C_1-2!", true), ("W_2-3!", false), ("C_3-4!", true)],
    ),
    row("-1", -1, &[("C_0-2!", false), ("W_1-2!", true), ("W_3-4!", true)]),
    row("3", 3, &[("C_0+2!", false), ("W_1+2!", false), ("C_2-3!", false)]),
    row("-3", -3, &[("W_0-2!", false), ("C_1-3!", false)]),
    row("5", 5, &[("W_0+3!", false), ("C_1+2!", false), ("W_2-2!", false)]),
    row("-5", -5, &[("C_0-3!", false), ("W_1-3!", false)]),
    row("7", 7, &[("C_0+3!", false), ("W_1+3!", false), ("C_2-2!", false)]),
    row("-7", -7, &[("W_0-3!", false)]),
    row("3^2", 9, &[("C_1+3!", false), ("W_2+2!", false)]),
    row("3*5", 15, &[("C_2+3!", false)]),
    row("3*7", 21, &[("W_3-2!", false)]),
    row("-3*7", -21, &[("C_1-4!", false)]),
    row("5^2", 25, &[("W_3+2!", false)]),
    row("-5^2", -25, &[("W_1-4!", false)]),
    row("3^3", 27, &[("C_3+2!", false)]),
    row("7^2", 49, &[("C_3+4!", false)]),
    row("3^2*7", 63, &[("C_4-2!", false)]),
    row("3^3*5", 135, &[("W_5-4!", false)]),
    row("5^2*7", 175, &[("W_7-5!", false)]),
    row("3^6", 729, &[("C_2+6!", false)]),
    row("3^4*5^2", 2025, &[("C_8-4!", false)]),
    row("3^5*7", 1701, &[("W_4+7!", false)]),
];

/// `C_8-4!` into `(family, n, eps, m)`.
pub fn parse_identity(s: &str) -> Option<(Family, u64, i8, u64)> {
    let s = s.trim();
    let family = Family::parse(&s[..1])?;
    let rest = s.get(1..)?.strip_prefix('_')?.strip_suffix('!')?;
    let pos = rest.find(['+', '-'])?;
    let n = rest[..pos].parse().ok()?;
    let eps = if &rest[pos..pos + 1] == "+" { 1 } else { -1 };
    let m = rest[pos + 1..].parse().ok()?;
    Some((family, n, eps, m))
}

/// Exact value of `u_n + eps m!`.
pub fn identity_value(family: Family, n: u64, eps: i8, m: u64) -> BigInt {
    let u = family.spec().iterate_term(n);
    let f = BigInt::from(factorial(m));
    if eps > 0 {
        u + f
    } else {
        u - f
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub printed_value: String,
    pub claimed: i64,
    pub actual: BigInt,
    pub claimed_degenerate: bool,
    /// degeneracy of the matching record, if the enumeration produced one
    pub record_degenerate: Option<bool>,
    pub ok: bool,
}

/// Checks every table identity against exact arithmetic and the enumeration.
pub fn check_table(report: &SolveReport) -> Vec<IdentityCheck> {
    let mut out = Vec::new();
    for row in SOLUTION_TABLE {
        for &(ident, dagger) in row.identities {
            let (family, n, eps, m) = parse_identity(ident).expect("table identity");
            let actual = identity_value(family, n, eps, m);
            let record = report
                .records
                .iter()
                .find(|r| r.family == family && r.n == n && r.m == m && r.eps == eps);
            let record_degenerate = record.map(|r| r.degenerate);
            out.push(IdentityCheck {
                identity: ident.to_string(),
                printed_value: row.printed_value.to_string(),
                claimed: row.value,
                ok: actual == BigInt::from(row.value) && record_degenerate == Some(dagger),
                actual,
                claimed_degenerate: dagger,
                record_degenerate,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetDiff {
    /// published but not derived
    pub missing: Vec<i64>,
    /// derived but not published
    pub extra: Vec<BigInt>,
}

impl SetDiff {
    pub fn is_empty(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty()
    }
}

pub fn compare_value_set(derived: &[BigInt]) -> SetDiff {
    let published: BTreeSet<BigInt> = published_value_set().into_iter().map(BigInt::from).collect();
    let derived: BTreeSet<BigInt> = derived.iter().cloned().collect();
    SetDiff {
        missing: published
            .difference(&derived)
            .map(|v| i64::try_from(v).expect("small value"))
            .collect(),
        extra: derived.difference(&published).cloned().collect(),
    }
}
