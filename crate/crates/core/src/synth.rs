//! Deterministic synthetic datasets: the three-table e-commerce example
//! (customer, product, order), a credit-style table with flag-driven
//! missingness, and a larger e-commerce set with a planted label signal.
//!
//! All generators return raw text cells; missing values are spelled `NA`
//! so tables round-trip through CSV unchanged.

use chrono::{Duration, NaiveDate};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::table::{Column, Table};

const NA: &str = "NA";
const FIXTURE_SEED: u64 = 20_190_405;

fn table(name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Table {
    let columns = header
        .iter()
        .enumerate()
        .map(|(j, h)| {
            let vals: Vec<Option<&str>> = rows.iter().map(|r| Some(r[j].as_str())).collect();
            Column::from_strs(*h, &vals)
        })
        .collect();
    Table::new(name, columns).expect("generator produces rectangular tables")
}

fn row(cells: &[&str]) -> Vec<String> {
    cells.iter().map(|s| s.to_string()).collect()
}

/// Tenths as a short decimal: 5 → "0.5", 10 → "1", 42 → "4.2".
fn tenths(t: u32) -> String {
    if t % 10 == 0 {
        (t / 10).to_string()
    } else {
        format!("{}.{}", t / 10, t % 10)
    }
}

const FIRST: &[&str] = &[
    "John", "Emma", "Liam", "Olivia", "Noah", "Ava", "Mason", "Sophia", "Lucas", "Mia", "Ethan", "Isabella",
];
const LAST: &[&str] = &[
    "Smith", "Baker", "Jones", "Brown", "Garcia", "Miller", "Davis", "Wilson", "Moore", "Clark", "Lewis", "Young",
];
const DOMAINS: &[&str] = &[
    "gmail.com",
    "yahoo.com",
    "rutgers.edu",
    "outlook.com",
    "aol.com",
    "mit.edu",
    "proton.me",
    "acm.org",
    "comcast.net",
];

pub const CUSTOMER_ROWS: usize = 200;
pub const PRODUCT_ROWS: usize = 200;
pub const PRODUCT_TYPES: &[(&str, &str)] = &[
    ("book", "15"),
    ("clothing", "32"),
    ("games", "18"),
    ("grocery", "5"),
    ("music", "15"),
];

/// Customer table: `customerID, email, fullname, phoneno, age, churned`.
/// About 30% of customers have fullname, phoneno and age all missing; the
/// first id is the dirty value `A1`.
pub fn illustrative_customer() -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(FIXTURE_SEED);
    let mut rows = vec![
        row(&["A1", "jw@gmail.com", "John Smith", "908-544-2331", "45", "0"]),
        row(&["2", "em@gmail.com", NA, NA, NA, "1"]),
        row(&["3", "cb@rutgers.edu", "Emma Baker", "732-548-2331", "40", "0"]),
        row(&["4", "as@yahoo.com", NA, NA, NA, "1"]),
    ];
    for id in 5..=CUSTOMER_ROWS {
        let first = *FIRST.choose(&mut rng).unwrap();
        let last = *LAST.choose(&mut rng).unwrap();
        let initials = format!("{}{}", &first[..1], &last[..1]).to_lowercase();
        let email = format!("{initials}{id}@{}", DOMAINS.choose(&mut rng).unwrap());
        let hidden = rng.random_bool(0.3);
        let churned = if rng.random_bool(0.35) { "1" } else { "0" };
        if hidden {
            rows.push(vec![id.to_string(), email, NA.into(), NA.into(), NA.into(), churned.into()]);
        } else {
            let phone = format!(
                "{}-{}-{:04}",
                rng.random_range(201..990),
                rng.random_range(200..1000),
                rng.random_range(0..10_000)
            );
            rows.push(vec![
                id.to_string(),
                email,
                format!("{first} {last}"),
                phone,
                rng.random_range(18..91).to_string(),
                churned.into(),
            ]);
        }
    }
    table(
        "customer",
        &["customerID", "email", "fullname", "phoneno", "age", "churned"],
        rows,
    )
}

/// Product table: `productID, pname, ptype, price, weight, shippingcost`.
/// Price is a function of the type (one dirty ` -999`); weight and shipping
/// cost are missing exactly for games and music, and shipping is 4 + weight.
pub fn illustrative_product() -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(FIXTURE_SEED + 1);
    let mut rows = vec![
        row(&["1", "StSqD", "book", "15", "0.5lb", "$4.5"]),
        row(&["2", "iAkmw", "clothing", "32", "0.6lb", " 4.6"]),
        row(&["3", "NudWI", "clothing", "32", "0.2lb", "$4.2"]),
        row(&["4", "wFztL", "games", "18", NA, NA]),
        row(&["5", "VZedw", "grocery", " -999", "1lb", "$5"]),
        row(&["6", "JJGrA", "music", "15", NA, NA]),
    ];
    let mut names: Vec<String> = rows.iter().map(|r| r[1].clone()).collect();
    let letters: Vec<char> = ('a'..='z').chain('A'..='Z').collect();
    for id in 7..=PRODUCT_ROWS {
        let name = loop {
            let n: String = (0..5).map(|_| *letters.choose(&mut rng).unwrap()).collect();
            if !names.contains(&n) {
                break n;
            }
        };
        names.push(name.clone());
        let (ptype, price) = *PRODUCT_TYPES.choose(&mut rng).unwrap();
        let (weight, ship) = if matches!(ptype, "games" | "music") {
            (NA.to_string(), NA.to_string())
        } else {
            let w = rng.random_range(1..=20u32);
            (format!("{}lb", tenths(w)), format!("${}", tenths(40 + w)))
        };
        rows.push(vec![id.to_string(), name, ptype.into(), price.into(), weight, ship]);
    }
    table(
        "product",
        &["productID", "pname", "ptype", "price", "weight", "shippingcost"],
        rows,
    )
}

/// Order table: `orderID, orderType, productID, customerID, time`, one row
/// per ordered product. Each order has one customer, type and day; a
/// customer orders at most once per day; no product repeats in an order.
pub fn illustrative_order() -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(FIXTURE_SEED + 2);
    let mut rows = vec![
        row(&["1", "web", "1", "4", "day 1"]),
        row(&["1", "web", "6", "4", "day 1"]),
        row(&["2", "web", "3", "2", "day 1"]),
        row(&["3", "web", "2", "2", "day 2"]),
        row(&["3", "web", "4", "2", "day 2"]),
        row(&["3", "web", "6", "2", "day 2"]),
        row(&["4", "phone", "5", "3", "day 2"]),
        row(&["4", "phone", "7", "3", "day 2"]),
    ];
    let mut used: Vec<(u32, u32)> = vec![(4, 1), (2, 1), (2, 2), (3, 2)];
    let mut order = 5;
    while rows.len() < 240 {
        let customer = rng.random_range(2..=60u32);
        let day = rng.random_range(1..=30u32);
        if used.contains(&(customer, day)) {
            continue;
        }
        used.push((customer, day));
        let otype = *["web", "phone", "store"].choose(&mut rng).unwrap();
        let k = rng.random_range(1..=4);
        let mut products: Vec<u32> = (1..=PRODUCT_ROWS as u32).collect();
        products.shuffle(&mut rng);
        for p in &products[..k] {
            rows.push(vec![
                order.to_string(),
                otype.into(),
                p.to_string(),
                customer.to_string(),
                format!("day {day}"),
            ]);
        }
        order += 1;
    }
    table(
        "order",
        &["orderID", "orderType", "productID", "customerID", "time"],
        rows,
    )
}

/// The three illustrative tables in customer, product, order order.
pub fn illustrative_tables() -> Vec<Table> {
    vec![illustrative_customer(), illustrative_product(), illustrative_order()]
}

/// Credit-style applicant table: the car-age and car-value columns are
/// missing exactly when `FLAG_OWN_CAR` is `N`.
pub fn credit_table(rows: usize, seed: u64) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows)
        .map(|i| {
            let own = rng.random_bool(0.35);
            let income = rng.random_range(40..400) * 250;
            let (age, value) = if own {
                (
                    rng.random_range(0..25).to_string(),
                    (rng.random_range(2..60) * 500).to_string(),
                )
            } else {
                (NA.into(), NA.into())
            };
            vec![
                (100_000 + i).to_string(),
                if own { "Y" } else { "N" }.to_string(),
                income.to_string(),
                age,
                value,
                ["Cash", "Revolving"].choose(&mut rng).unwrap().to_string(),
            ]
        })
        .collect();
    table(
        "credit",
        &["SK_ID_CURR", "FLAG_OWN_CAR", "AMT_INCOME_TOTAL", "OWN_CAR_AGE", "CAR_VALUE", "CONTRACT_TYPE"],
        data,
    )
}

/// E-commerce customers and orders with a planted label: a customer's
/// `churned` flag is a noisy decreasing function of their order count.
/// Returns `(customers, orders)`.
pub fn planted_ecommerce(customers: usize, seed: u64) -> (Table, Table) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = NaiveDate::from_ymd_opt(2023, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    let mut crows = Vec::with_capacity(customers);
    let mut orows = Vec::new();
    let mut order_id = 1u64;
    for c in 0..customers {
        let cid = 1000 + c as u64;
        let count = rng.random_range(0..=10u32);
        let logit = 1.1 * (4.5 - count as f64) + rng.random_range(-1.5..1.5);
        let churned = rng.random_bool(1.0 / (1.0 + (-logit).exp()));
        crows.push(vec![
            cid.to_string(),
            ["north", "south", "east", "west"].choose(&mut rng).unwrap().to_string(),
            rng.random_range(18..80).to_string(),
            if churned { "1" } else { "0" }.to_string(),
        ]);
        let mut t = start + Duration::minutes(rng.random_range(0..60 * 24 * 30));
        for _ in 0..count {
            t += Duration::minutes(rng.random_range(60..60 * 24 * 20));
            orows.push(vec![
                order_id.to_string(),
                cid.to_string(),
                t.format("%Y-%m-%d %H:%M:%S").to_string(),
                ["web", "app", "phone"].choose(&mut rng).unwrap().to_string(),
                format!("{:.2}", rng.random_range(5.0..250.0f64)),
            ]);
            order_id += 1;
        }
    }
    (
        table("customers", &["customerID", "region", "age", "churned"], crows),
        table("orders", &["orderID", "customerID", "ordered_at", "channel", "amount"], orows),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(illustrative_order(), illustrative_order());
        assert_eq!(planted_ecommerce(50, 3), planted_ecommerce(50, 3));
        assert_eq!(credit_table(30, 1), credit_table(30, 1));
    }

    #[test]
    fn order_fixture_invariants() {
        let t = illustrative_order();
        assert!(t.row_count() >= 200);
        let col = |n: &str| -> Vec<String> {
            t.column(n).unwrap().values.iter().map(|v| v.to_string()).collect()
        };
        let (o, p, c, d) = (col("orderID"), col("productID"), col("customerID"), col("time"));
        let mut pairs: Vec<(&String, &String)> = o.iter().zip(&p).collect();
        pairs.sort();
        let n = pairs.len();
        pairs.dedup();
        assert_eq!(pairs.len(), n, "(orderID, productID) unique");
        let mut cd: Vec<(&String, &String, &String)> = (0..n).map(|i| (&c[i], &d[i], &o[i])).collect();
        cd.sort();
        cd.dedup();
        for w in cd.windows(2) {
            assert!(!(w[0].0 == w[1].0 && w[0].1 == w[1].1), "customer orders twice on one day");
        }
    }

    #[test]
    fn tenths_formatting() {
        assert_eq!(tenths(5), "0.5");
        assert_eq!(tenths(10), "1");
        assert_eq!(tenths(46), "4.6");
    }
}
