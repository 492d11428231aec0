use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tempfile::tempdir;

use cwfact_core::scan::{max_shifted_nu2_exact, unit_factorial_shifts, unit_shifts, CellValue, Scan, ScanPlan};
use cwfact_core::valuation::nu;
use cwfact_core::{max_shifted_nu2, SUnitBox, ScanOptions};

fn medium_box() -> SUnitBox {
    SUnitBox::new(vec![3, 5, 7], vec![40, 30, 20]).unwrap()
}

#[test]
fn worker_count_does_not_matter() {
    let b = medium_box();
    let shifts = unit_factorial_shifts(2, 12);
    let reports: Vec<_> = [1usize, 2, 8]
        .iter()
        .map(|&w| {
            max_shifted_nu2(
                &b,
                &shifts,
                ScanOptions {
                    workers: w,
                    batch: 3,
                    ..Default::default()
                },
            )
            .unwrap()
        })
        .collect();
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0], reports[2]);
}

#[test]
fn width_does_not_matter() {
    let b = medium_box();
    let shifts = unit_factorial_shifts(2, 40);
    let base = max_shifted_nu2(&b, &shifts, ScanOptions::default()).unwrap();
    for width in [24, 64] {
        let r = max_shifted_nu2(
            &b,
            &shifts,
            ScanOptions {
                width,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(
            (r.max_val, &r.argmax, r.count_skipped_zero),
            (base.max_val, &base.argmax, base.count_skipped_zero)
        );
    }
}

#[test]
fn small_box_matches_exact_reference() {
    let b = SUnitBox::new(vec![3, 5, 7], vec![6, 4, 3]).unwrap();
    for shifts in [unit_shifts(), unit_factorial_shifts(2, 9)] {
        let r = max_shifted_nu2(
            &b,
            &shifts,
            ScanOptions {
                width: 24,
                ..Default::default()
            },
        )
        .unwrap();
        let (max, arg, skipped) = max_shifted_nu2_exact(&b, &shifts);
        assert_eq!(r.max_val, max);
        assert_eq!(r.count_skipped_zero, skipped);
        let am = r.argmax.unwrap();
        assert_eq!(Some((am.exponents, am.shift_index)), arg);
    }
}

#[test]
fn checkpoint_resume_is_identical() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("scan.ckpt.json");
    let b = medium_box();
    let shifts = unit_factorial_shifts(2, 10);
    let opts = ScanOptions {
        batch: 4,
        workers: 2,
        ..Default::default()
    };
    let uninterrupted = max_shifted_nu2(&b, &shifts, opts).unwrap();

    let first = Scan::new(&b, &shifts, opts).unwrap().with_checkpoint(&path);
    assert!(first.run_batches(Some(3)).unwrap().is_none());
    assert!(path.exists());
    let resumed = Scan::new(&b, &shifts, opts)
        .unwrap()
        .with_checkpoint(&path)
        .run()
        .unwrap();
    assert_eq!(resumed, uninterrupted);

    // a checkpoint from another scan is refused
    let other = SUnitBox::new(vec![3, 5, 7], vec![40, 30, 21]).unwrap();
    assert!(Scan::new(&other, &shifts, opts)
        .unwrap()
        .with_checkpoint(&path)
        .run()
        .is_err());
}

#[test]
fn truncated_cells_match_exact() {
    let b = SUnitBox::new(vec![3, 5, 7], vec![130, 100, 80]).unwrap();
    let shifts = unit_factorial_shifts(2, 500);
    let mut rng = StdRng::seed_from_u64(2024);
    for width in [24, 32, 64] {
        let plan = ScanPlan::new(&b, &shifts, width).unwrap();
        for _ in 0..10_000 / 3 + 1 {
            let e = vec![
                rng.random_range(0..=130),
                rng.random_range(0..=100),
                rng.random_range(0..=80),
            ];
            let si = rng.random_range(0..shifts.len());
            let exact: BigInt = b.value(&e) + &shifts[si].value;
            let expect = match nu(&exact, 2) {
                Ok(v) => CellValue::Nu2(v),
                Err(_) => CellValue::Zero,
            };
            assert_eq!(plan.evaluate_cell(&e, si), expect, "{e:?} {}", shifts[si].label);
        }
    }
}

#[test]
fn cancelling_cells_are_skipped() {
    // 3 - 1 - 2! = 0 and 1 + 1 - 2! = 0
    let b = SUnitBox::new(vec![3], vec![1]).unwrap();
    let shifts = unit_factorial_shifts(2, 2);
    let r = max_shifted_nu2(&b, &shifts, ScanOptions::default()).unwrap();
    let (_, _, skipped) = max_shifted_nu2_exact(&b, &shifts);
    assert_eq!(r.count_skipped_zero, skipped);
    assert_eq!(skipped, 2);
}
