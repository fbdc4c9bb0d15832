#![allow(dead_code)]

use catcollapse::Table;

/// Schooling (rows) by age group (columns), West German social survey 1991/92.
pub const WERMUTH_COX: [[f64; 5]; 5] = [
    [12.0, 13.0, 12.0, 20.0, 7.0],
    [215.0, 507.0, 493.0, 460.0, 137.0],
    [277.0, 300.0, 192.0, 126.0, 38.0],
    [52.0, 91.0, 47.0, 15.0, 6.0],
    [233.0, 225.0, 102.0, 74.0, 19.0],
];

/// Race × sex × opinion on legalised abortion × age group, row-major.
pub const CHRISTENSEN: [f64; 72] = [
    // white, male: supports / opposes / undecided
    96.0, 138.0, 117.0, 75.0, 72.0, 83.0, //
    44.0, 64.0, 56.0, 48.0, 49.0, 60.0, //
    1.0, 2.0, 6.0, 5.0, 6.0, 8.0, //
    // white, female
    140.0, 171.0, 152.0, 101.0, 102.0, 111.0, //
    43.0, 65.0, 58.0, 51.0, 58.0, 67.0, //
    1.0, 4.0, 9.0, 9.0, 10.0, 16.0, //
    // nonwhite, male
    24.0, 18.0, 16.0, 12.0, 6.0, 4.0, //
    5.0, 7.0, 7.0, 6.0, 8.0, 10.0, //
    2.0, 1.0, 3.0, 4.0, 3.0, 4.0, //
    // nonwhite, female
    21.0, 25.0, 20.0, 17.0, 14.0, 13.0, //
    4.0, 6.0, 5.0, 5.0, 5.0, 5.0, //
    1.0, 2.0, 1.0, 1.0, 1.0, 1.0,
];

pub fn wermuth_cox() -> Table {
    let flat: Vec<f64> = WERMUTH_COX.iter().flatten().copied().collect();
    Table::from_dense(vec![5, 5], &flat).unwrap()
}

pub fn christensen() -> Table {
    Table::from_dense(vec![2, 2, 3, 6], &CHRISTENSEN).unwrap()
}
