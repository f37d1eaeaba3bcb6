mod common;

use algstat::bits::{bs, BitString};
use algstat::enumerate::build_table;
use algstat::machine::{Budgets, Condition};
use algstat::models_set::{uniform_condition, SetDescription};
use proptest::prelude::*;

use common::{disagreement, naive_table};

fn check(max_len: u32, cond: &Condition) {
    let budgets = Budgets::default();
    let table = build_table(max_len, cond, &budgets).unwrap();
    let naive = naive_table(max_len, cond, &budgets);
    assert_eq!(disagreement(&table, &naive), None, "L={max_len}");
}

#[test]
fn unconditional_tables_up_to_twelve() {
    for l in 0..=12 {
        check(l, &Condition::None);
    }
}

#[test]
fn string_conditions() {
    for c in ["", "1", "1011", "0000000011"] {
        check(11, &Condition::Str(bs(c)));
    }
}

#[test]
fn model_condition() {
    let set: SetDescription = "ham:5,2".parse().unwrap();
    check(12, &uniform_condition(&set, 1 << 10).unwrap());
}

#[test]
fn tight_budgets() {
    let budgets = Budgets::new(6, 5).unwrap();
    let table = build_table(12, &Condition::None, &budgets).unwrap();
    assert_eq!(disagreement(&table, &naive_table(12, &Condition::None, &budgets)), None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_string_conditions(bits in proptest::collection::vec(any::<bool>(), 0..12)) {
        let cond = Condition::Str(BitString::from_vec(bits));
        let budgets = Budgets::default();
        let table = build_table(9, &cond, &budgets).unwrap();
        prop_assert_eq!(disagreement(&table, &naive_table(9, &cond, &budgets)), None);
    }
}
