use ads_core::features::{generate_features, FeatureConfig, Stream};
use ads_core::infer::pattern::mine_string_pattern;
use ads_core::infer::{profile_table, ProfileConfig};
use ads_core::missingness::{explain_missingness, missing_clusters, ExplainConfig};
use ads_core::relation::{enumerate_paths, merge_graphs, to_relation_graph, Cardinality, PathConfig};
use ads_core::structure::{build_association_graph, build_schema_tree, EdgeKind, FdConfig};
use ads_core::{normalize_missing, synth, Dataset, NaOptions, Table, Value};

fn normalized(t: Table) -> Table {
    normalize_missing(&t, &NaOptions::default()).0
}

#[test]
fn order_schema_tree() {
    let t = normalized(synth::illustrative_order());
    let tree = build_schema_tree(&t, &FdConfig::default()).unwrap();
    assert_eq!(tree.key, vec!["orderID", "productID"]);
    let order = tree.find(&["orderID"]).unwrap().id;
    let set = tree.find(&["customerID", "time"]).unwrap().id;
    let otype = tree.find(&["orderType"]).unwrap().id;
    assert_eq!(tree.edge_between(order, set).unwrap().kind, EdgeKind::Bidirectional);
    assert_eq!(tree.edge_between(order, otype).unwrap().kind, EdgeKind::Directional);
}

#[test]
fn product_associations() {
    let t = normalized(synth::illustrative_product());
    let profiles = profile_table(&t, &ProfileConfig::default());
    let g = build_association_graph(&t, &profiles, 0.9).without_key_edges();
    assert!(g.has_edge("weight", "shippingcost"));
    assert!(g.has_edge("shippingcost", "weight"));
    assert!(g.has_edge("ptype", "price"));
    assert!(!g.edges.iter().any(|e| e.from == "productID"));
}

#[test]
fn customer_patterns() {
    let t = normalized(synth::illustrative_customer());
    for (c, want) in [("email", "*@*.*"), ("fullname", "* *"), ("phoneno", "*-*-*")] {
        let vals: Vec<String> = t
            .column(c)
            .unwrap()
            .values
            .iter()
            .filter(|v| !v.is_null())
            .map(|v| v.to_string())
            .collect();
        assert_eq!(mine_string_pattern(&vals, 0.95).unwrap().to_string(), want);
    }
}

#[test]
fn missingness_clusters_and_rule() {
    let c = normalized(synth::illustrative_customer());
    let cl = missing_clusters(&c, 0.8);
    assert_eq!(cl.len(), 1);
    assert_eq!(cl[0].columns, vec!["age", "fullname", "phoneno"]);

    let p = normalized(synth::illustrative_product());
    let cl = missing_clusters(&p, 0.8);
    assert_eq!(cl.len(), 1);
    assert_eq!(cl[0].columns, vec!["shippingcost", "weight"]);
    let rules = explain_missingness(&p, &cl[0], &ExplainConfig::default()).unwrap();
    let missing: Vec<String> = rules.iter().filter(|r| r.predicted).map(|r| r.to_string()).collect();
    assert_eq!(missing, vec!["ptype IN {games,music} => MISSING (purity=1.00, support=75)"]);
}

#[test]
fn random_missingness_has_no_rules() {
    let c = normalized(synth::illustrative_customer());
    let cl = missing_clusters(&c, 0.8);
    let rules = explain_missingness(&c, &cl[0], &ExplainConfig::default()).unwrap();
    assert!(rules.is_empty(), "{rules:?}");
}

#[test]
fn combined_relation_paths() {
    let graphs: Vec<_> = synth::illustrative_tables()
        .into_iter()
        .map(normalized)
        .map(|t| to_relation_graph(&build_schema_tree(&t, &FdConfig::default()).unwrap(), &t))
        .collect();
    let g = merge_graphs(&graphs, false).unwrap();
    let paths = enumerate_paths(&g, "customerID", &PathConfig::default()).unwrap();
    let find = |d: &str| paths.iter().find(|p| p.dotted() == d).unwrap_or_else(|| panic!("missing {d}"));
    assert_eq!(find("customerID.age").many_count, 0);
    assert_eq!(find("customerID.orderID").many_count, 1);
    assert_eq!(find("customerID.orderID.productID.price").many_count, 2);
    assert!(paths.iter().all(|p| p.many_count <= 2 && p.steps.len() <= 4));

    let from_order = enumerate_paths(&g, "orderID", &PathConfig::default()).unwrap();
    let p = from_order.iter().find(|p| p.dotted() == "orderID.customerID.email").unwrap();
    assert!(p.steps.iter().all(|s| s.cardinality == Cardinality::OneToOne));
}

#[test]
fn illustrative_customer_features() {
    let ds = Dataset::new(synth::illustrative_tables().into_iter().map(normalized).collect()).unwrap();
    let cfg = FeatureConfig {
        label: Some("churned".into()),
        ..Default::default()
    };
    let m = generate_features(&ds, "customerID", &cfg).unwrap();
    assert_eq!(m.keys.len(), 200);
    assert!(m.names().iter().all(|n| !n.contains("churned")));
    assert!(m.feature("customerID.email__part2").is_some());
    let row = m.keys.iter().position(|k| k == &Value::text("2")).unwrap();
    let Stream::Numeric(count) = &m.feature("customerID.orderID__count").unwrap().values else {
        panic!("count is numeric")
    };
    // Customer 2 places orders 2 and 3 among the fixed leading rows.
    assert!(count[row].unwrap() >= 2.0);
}
