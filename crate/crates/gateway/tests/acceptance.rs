//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! fails. Counts and time limits are pinned below.

mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use serde_json::{json, Value};
use sparqlrest::client::HttpEndpoint;
use sparqlrest::docs::render_docs;
use sparqlrest::testkit::{CITED_DOI, CITING_DOI};
use sparqlrest_core::refine::{apply_json_dict, serialize_json};
use sparqlrest_core::{
    apply_plan, parse_document, parse_refinements, parse_results, substitute, Cell, CallError, CallOutcome,
    ConfigErrorKind, Endpoint, HttpMethod, ResultTable, ValueType,
};
use support::{find_class, parse_html, text, Env};

const GOLDEN_TIME_LIMIT: Duration = Duration::from_secs(5);
const ORDER_CASES: usize = 200;
const ORDER_TIME_LIMIT: Duration = Duration::from_secs(30);
const MAX_ROWS: usize = 50;
const DICT_CASES: usize = 500;
const SURFACE_CASES: usize = 50;
const INVALID_CONFIGS: usize = 12;

type Check = fn(&Env) -> Result<String, String>;

fn main() {
    let env = Env::start();
    let criteria: [(&str, Check); 9] = [
        ("golden outputs", golden_outputs),
        ("refinement order of execution", order_of_execution),
        ("format parameter beats Accept", format_priority),
        ("typed comparisons", typed_comparisons),
        ("dict split-count law", dict_law),
        ("surface equivalence", surface_equivalence),
        ("config round trip and validation", config_validation),
        ("documentation and dashboard", docs_and_dashboard),
        ("pipeline no-op law", no_op_law),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(|| check(&env))).unwrap_or_else(|panic| {
            Err(panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("PASS {}: {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}: {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn ensure(cond: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(why())
    }
}

fn embedded(env: &Env, url: &str, method: &str, format: &str) -> (u16, String) {
    match env.manager.get_op(url) {
        Ok(op) => op.exec(method, format),
        Err(e) => {
            let outcome = CallOutcome::from(CallError::from(e));
            (outcome.status, outcome.body)
        }
    }
}

// 1

fn golden_outputs(env: &Env) -> Result<String, String> {
    let started = Instant::now();
    let base = format!("/api/v1/citations/{CITED_DOI}");

    let (status, csv) = embedded(env, &format!("{base}?format=csv"), "get", "json");
    let golden_csv = "citing,cited\n10.3233/ds-190019,10.1108/jd-12-2013-0166\n10.3233/sw-160224,10.1108/jd-12-2013-0166\n";
    ensure(status == 200 && csv == golden_csv, || format!("csv: {status} {csv:?}"))?;

    let cited_array = json!(["10.1108", "jd-12-2013-0166"]);
    let cited_dicts = json!([{"one": "1", "two": ".1108"}, {"one": "jd-12-2", "two": "13-0166"}]);
    let expected = [
        (
            "",
            json!([
                {"citing": "10.3233/ds-190019", "cited": "10.1108/jd-12-2013-0166"},
                {"citing": "10.3233/sw-160224", "cited": "10.1108/jd-12-2013-0166"}
            ]),
        ),
        (
            "?json=array(\"/\",cited)",
            json!([
                {"citing": "10.3233/ds-190019", "cited": cited_array},
                {"citing": "10.3233/sw-160224", "cited": cited_array}
            ]),
        ),
        (
            "?json=array(\"/\",cited)&json=dict(\"/\",citing,prefix,suffix)",
            json!([
                {"citing": {"prefix": "10.3233", "suffix": "ds-190019"}, "cited": cited_array},
                {"citing": {"prefix": "10.3233", "suffix": "sw-160224"}, "cited": cited_array}
            ]),
        ),
        (
            "?json=array(\"/\",cited)&json=dict(\"/\",citing,prefix,suffix)&json=dict(\"0\",cited,one,two)",
            json!([
                {"citing": {"prefix": "10.3233", "suffix": "ds-190019"}, "cited": cited_dicts},
                {"citing": {"prefix": "10.3233", "suffix": "sw-160224"}, "cited": cited_dicts}
            ]),
        ),
    ];
    for (query, want) in &expected {
        let (status, body) = embedded(env, &format!("{base}{query}"), "get", "json");
        let got: Value = serde_json::from_str(&body).map_err(|e| format!("{query}: {e}: {body}"))?;
        ensure(status == 200 && &got == want, || format!("{query}: {status} {body}"))?;
        // keys come out in header order
        ensure(body.find("\"citing\"") < body.find("\"cited\""), || format!("{query}: key order"))?;
    }
    // the path parameter is lower-cased before it reaches the query
    let (_, upper) = embedded(env, &format!("/api/v1/citations/{}", CITED_DOI.to_uppercase()), "get", "json");
    let got: Value = serde_json::from_str(&upper).map_err(|e| e.to_string())?;
    ensure(got == expected[0].1, || format!("upper-case DOI: {upper}"))?;

    let elapsed = started.elapsed();
    ensure(elapsed < GOLDEN_TIME_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("csv and {} json shapes exact, {} ms", expected.len(), elapsed.as_millis()))
}

// 2

type Row = [String; 3];
const COLUMNS: [&str; 3] = ["s", "n", "d"];

fn typed_table(rows: &[Row]) -> ResultTable {
    let mut t = ResultTable::from_text_rows(&COLUMNS, rows.iter().map(|r| r.iter().cloned())).unwrap();
    t.set_type("n", ValueType::Int);
    t.set_type("d", ValueType::DateTime);
    t
}

fn row_strategy() -> impl Strategy<Value = Row> {
    (
        "[ab]{0,2}",
        proptest::option::of(-3i64..12).prop_map(|n| n.map(|n| n.to_string()).unwrap_or_default()),
        proptest::option::of((2015u32..2017, 1u32..4, 1u32..3))
            .prop_map(|d| d.map(|(y, m, d)| format!("{y}-{m:02}-{d:02}")).unwrap_or_default()),
    )
        .prop_map(|(s, n, d)| [s, n, d])
}

fn param_strategy() -> impl Strategy<Value = (String, String)> {
    let field = proptest::sample::select(COLUMNS.to_vec());
    let order = proptest::sample::select(vec!["asc", "desc"]);
    proptest::prop_oneof![
        field.clone().prop_map(|f| ("require".to_string(), f.to_string())),
        (proptest::sample::select(vec!['<', '>', '=']), -3i64..12).prop_map(|(op, v)| ("filter".into(), format!("n:{op}{v}"))),
        (proptest::sample::select(vec!['<', '>']), proptest::sample::select(vec!["2016", "2016-02", "2015-03-01"]))
            .prop_map(|(op, v)| ("filter".into(), format!("d:{op}{v}"))),
        proptest::sample::select(vec!["^a", "b$", "a|b"]).prop_map(|re| ("filter".into(), format!("s:{re}"))),
        (order, field).prop_map(|(o, f)| ("sort".into(), format!("{o}({f})"))),
        proptest::sample::select(vec!["csv", "json"]).prop_map(|f| ("format".into(), f.to_string())),
        proptest::sample::select(vec!["array(\"-\",d)", "dict(\"a\",s,x,y)"]).prop_map(|j| ("json".into(), j.to_string())),
    ]
}

fn render(rows: &[Row], params: &[(String, String)]) -> String {
    let plan = parse_refinements(params.iter().map(|(k, v)| (k.as_str(), v.as_str()))).expect("generated plans parse");
    match apply_plan(typed_table(rows), &plan, None) {
        Ok(r) => format!("{:?}\n{}", r.format, r.body),
        Err(e) => format!("error: {e}"),
    }
}

/// Stable partition by kind, re-interleaved by `choices`.
fn permute_across_kinds(params: &[(String, String)], choices: &[usize]) -> Vec<(String, String)> {
    let mut queues: Vec<std::collections::VecDeque<(String, String)>> = Vec::new();
    for kind in ["require", "filter", "sort", "format", "json"] {
        let q: std::collections::VecDeque<_> = params.iter().filter(|(k, _)| k == kind).cloned().collect();
        if !q.is_empty() {
            queues.push(q);
        }
    }
    let mut out = Vec::new();
    for c in choices.iter().cycle() {
        if queues.is_empty() {
            break;
        }
        let i = c % queues.len();
        out.push(queues[i].pop_front().unwrap());
        if queues[i].is_empty() {
            queues.remove(i);
        }
    }
    out
}

fn swap_first_two_sorts(params: &[(String, String)]) -> Option<Vec<(String, String)>> {
    let sorts: Vec<usize> = params.iter().enumerate().filter(|(_, (k, _))| k == "sort").map(|(i, _)| i).collect();
    let (&a, &b) = (sorts.first()?, sorts.get(1)?);
    let mut swapped = params.to_vec();
    swapped.swap(a, b);
    Some(swapped)
}

fn order_of_execution(_: &Env) -> Result<String, String> {
    let started = Instant::now();
    let mut runner = TestRunner::deterministic();
    let case = (
        proptest::collection::vec(row_strategy(), 0..=MAX_ROWS),
        proptest::collection::vec(param_strategy(), 0..10),
        proptest::collection::vec(0usize..7, 1..12),
    );
    let mut swaps = 0;
    let mut detected = 0;
    for i in 0..ORDER_CASES {
        let (rows, params, choices) = case.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        let out = render(&rows, &params);
        let permuted = permute_across_kinds(&params, &choices);
        ensure(render(&rows, &permuted) == out, || format!("case {i}: {params:?} vs {permuted:?}"))?;
        if let Some(swapped) = swap_first_two_sorts(&params) {
            swaps += 1;
            if render(&rows, &swapped) != out {
                detected += 1;
            }
        }
    }
    ensure(detected > 0, || format!("no within-kind swap changed the output in {swaps} tries"))?;
    let elapsed = started.elapsed();
    ensure(elapsed < ORDER_TIME_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("{ORDER_CASES} cases invariant; swapped sorts changed output in {detected} of {swaps}"))
}

// 3

fn format_priority(env: &Env) -> Result<String, String> {
    let path = format!("/api/v1/citations/{CITED_DOI}");
    let json = env.http("GET", &path, &[("format", "json")], Some("text/csv"));
    ensure(json.status == 200 && json.content_type.starts_with("application/json"), || format!("{json:?}"))?;
    serde_json::from_str::<Value>(&json.body).map_err(|e| e.to_string())?;
    let csv = env.http("GET", &path, &[("format", "csv")], Some("application/json"));
    ensure(csv.status == 200 && csv.content_type.starts_with("text/csv"), || format!("{csv:?}"))?;
    ensure(csv.body.starts_with("citing,cited\n"), || csv.body.clone())?;
    // without the parameter the header decides
    let by_header = env.http("GET", &path, &[], Some("text/csv"));
    ensure(by_header.body == csv.body, || by_header.body.clone())?;
    Ok("format=json over text/csv, format=csv over application/json".into())
}

// 4

/// `YYYY[-MM[-DD]]` as a tuple, missing parts counting as their first value.
fn date_key(s: &str) -> (u32, u32, u32) {
    let mut parts = s.split('-').map(|p| p.parse::<u32>().unwrap());
    (parts.next().unwrap(), parts.next().unwrap_or(1), parts.next().unwrap_or(1))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for at in 0..=p.len() {
            let mut q = p.clone();
            q.insert(at, n - 1);
            out.push(q);
        }
    }
    out
}

fn one_column(name: &str, value_type: ValueType, values: &[&str]) -> ResultTable {
    let mut t = ResultTable::from_text_rows(&[name], values.iter().map(|v| [*v])).unwrap();
    t.set_type(name, value_type);
    t
}

fn column_of(body: &str, name: &str) -> Vec<String> {
    let rows: Vec<Value> = serde_json::from_str(body).unwrap();
    rows.iter().map(|r| r[name].as_str().unwrap().to_owned()).collect()
}

fn run_plan(table: ResultTable, param: (&str, &str)) -> Vec<String> {
    let name = table.header()[0].clone();
    let plan = parse_refinements([param]).unwrap();
    column_of(&apply_plan(table, &plan, None).unwrap().body, &name)
}

fn typed_comparisons(env: &Env) -> Result<String, String> {
    let dates = ["2016-04-30", "2016-05-01", "2016-06-01"];
    let bound = date_key("2016-05");
    let want: Vec<String> = dates.iter().filter(|d| date_key(d) > bound).map(|d| d.to_string()).collect();
    ensure(want == ["2016-06-01"], || format!("oracle kept {want:?}"))?;
    let got = run_plan(one_column("creation", ValueType::DateTime, &dates), ("filter", "creation:>2016-05"));
    ensure(got == want, || format!("filter kept {got:?}"))?;

    let numbers = ["9", "10", "2"];
    // brute force: the only permutation whose neighbours never increase
    let descending: Vec<Vec<String>> = permutations(numbers.len())
        .into_iter()
        .filter(|p| p.windows(2).all(|w| numbers[w[0]].parse::<i64>().unwrap() >= numbers[w[1]].parse::<i64>().unwrap()))
        .map(|p| p.iter().map(|&i| numbers[i].to_owned()).collect())
        .collect();
    ensure(descending == [["10", "9", "2"]], || format!("oracle gave {descending:?}"))?;
    let got = run_plan(one_column("n", ValueType::Int, &numbers), ("sort", "desc(n)"));
    ensure(got == descending[0], || format!("sort gave {got:?}"))?;
    // text order would differ
    let as_text = run_plan(one_column("n", ValueType::Str, &numbers), ("sort", "desc(n)"));
    ensure(as_text == ["9", "2", "10"], || format!("text sort gave {as_text:?}"))?;

    // the same filter through the fixture: unbound dates sort below every date
    let (status, body) = embedded(env, &format!("/api/v1/citations-dated/{CITED_DOI}?filter=creation:>2016-05"), "get", "json");
    ensure(status == 200, || body.clone())?;
    let creation = column_of(&body, "creation");
    let mock_dates = ["2019-08-08", "2016-04-30", "", "2016-05-01", "2016-06-01"];
    let oracle: Vec<&str> = mock_dates.iter().copied().filter(|d| !d.is_empty() && date_key(d) > bound).collect();
    ensure(creation == oracle, || format!("fixture filter kept {creation:?}"))?;
    Ok("filter keeps {2016-06-01}; desc(n) gives 10,9,2".into())
}

// 5

fn dict_law(_: &Env) -> Result<String, String> {
    let mut runner = TestRunner::deterministic();
    let case = ("[ab/.\\-]{0,20}", proptest::sample::select(vec!["/", ".", "-", "ab", "//", "a"]), 1usize..7);
    let mut full = 0;
    for i in 0..DICT_CASES {
        let (text, sep, k) = case.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        let keys: Vec<String> = (0..k).map(|j| format!("k{j}")).collect();
        let t = ResultTable::from_text_rows(&["f"], [[text.as_str()]]).unwrap();
        let out = apply_json_dict(t, sep, "f", &keys).map_err(|e| e.to_string())?;
        let Cell::Record(fields) = &out.rows()[0][0] else { return Err(format!("case {i}: not a record")) };
        let pieces: Vec<&str> = fields.iter().map(|(_, v)| v.as_text().unwrap()).collect();
        ensure(pieces.len() == k, || format!("case {i}: {} pieces for {k} keys", pieces.len()))?;
        let separators = text.matches(sep).count();
        let splits = separators.min(k - 1);
        // at most k-1 splits: anything past them is padding
        ensure(pieces[splits + 1..].iter().all(|p| p.is_empty()), || format!("case {i}: {text:?} {sep:?} {pieces:?}"))?;
        if separators >= k - 1 {
            full += 1;
            ensure(pieces.join(sep) == text, || format!("case {i}: {text:?} {sep:?} {pieces:?}"))?;
        }
    }
    Ok(format!("{DICT_CASES} cases, {full} with enough separators to reassemble"))
}

// 6

fn call_strategy() -> impl Strategy<Value = (String, &'static str, Vec<(&'static str, &'static str)>)> {
    let doi = proptest::sample::select(vec![
        CITED_DOI.to_string(),
        CITED_DOI.to_uppercase(),
        CITING_DOI.to_string(),
        "10.5555/none".to_string(),
        "nodoi".to_string(),
    ]);
    let op = proptest::sample::select(vec!["citations", "citations-dated", "references", "unknown"]);
    let method = proptest::sample::select(vec!["get", "post"]);
    let refinement = proptest::sample::select(vec![
        ("require", "creation"),
        ("filter", "creation:>2016-05"),
        ("filter", "citing:sw"),
        ("sort", "desc(citing)"),
        ("sort", "asc(creation)"),
        ("format", "csv"),
        ("format", "json"),
        ("json", "array(\"/\",cited)"),
        ("json", "dict(\"/\",citing,prefix,suffix)"),
        ("sort", "sideways(citing)"),
    ]);
    (op, doi, method, proptest::collection::vec(refinement, 0..4))
        .prop_map(|(op, doi, method, refinements)| (format!("/api/v1/{op}/{doi}"), method, refinements))
}

fn surface_equivalence(env: &Env) -> Result<String, String> {
    let mut runner = TestRunner::deterministic();
    let strategy = call_strategy();
    let mut statuses = std::collections::BTreeMap::<u16, usize>::new();
    for i in 0..SURFACE_CASES {
        let (path, method, refinements) = strategy.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        let query: Vec<String> = refinements.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let url = if query.is_empty() { path.clone() } else { format!("{path}?{}", query.join("&")) };

        let embedded = embedded(env, &url, method, "json");
        let cli = env.cli(&["-c", &url, "-m", method, "-f", "json"]).status_and_body();
        let http = env.http(&method.to_uppercase(), &path, &refinements, Some("application/json"));
        let http = (http.status, http.body);
        ensure(embedded == cli && cli == http, || {
            format!("case {i} {method} {url}:\n embedded {embedded:?}\n cli {cli:?}\n http {http:?}")
        })?;
        *statuses.entry(http.0).or_default() += 1;
    }
    let mix: Vec<String> = statuses.iter().map(|(s, n)| format!("{s}x{n}")).collect();
    Ok(format!("{SURFACE_CASES} calls agree; statuses {}", mix.join(" ")))
}

// 7

const VALID: &str = "\
#url /api/v1
#type api
#method get
#title Items
#description Item data.
#version 1
#endpoint http://localhost:1/sparql

#url /items/{id}
#type operation
#id str([a-z]+)
#method get
#description One item.
#field_type str(x)
#sparql SELECT ?x WHERE { ?x ?p \"[[id]]\" }
";

type KindCheck = fn(&ConfigErrorKind) -> bool;

fn config_validation(env: &Env) -> Result<String, String> {
    let doc = parse_document(&env.config).map_err(|e| e.to_string())?;
    let again = parse_document(&doc.to_hash_format()).map_err(|e| e.to_string())?;
    ensure(again == doc, || "fixture changed across a round trip".into())?;
    parse_document(VALID).map_err(|e| format!("base config: {e}"))?;

    let op_only = VALID.split("\n\n").nth(1).unwrap();
    let cases: [(&str, String, KindCheck); INVALID_CONFIGS] = [
        ("empty document", String::new(), |k| matches!(k, ConfigErrorKind::EmptyDocument)),
        ("missing api block", op_only.to_owned(), |k| matches!(k, ConfigErrorKind::MissingApiBlock)),
        ("#url not first", VALID.replacen("#url /api/v1\n#type api", "#type api\n#url /api/v1", 1), |k| {
            matches!(k, ConfigErrorKind::UrlNotFirst)
        }),
        ("undeclared placeholder", VALID.replace("[[id]]", "[[other]]"), |k| {
            matches!(k, ConfigErrorKind::UndeclaredPlaceholder(_))
        }),
        ("bad regex", VALID.replace("str([a-z]+)", "str([a-z+)"), |k| matches!(k, ConfigErrorKind::BadParamShape(_))),
        ("bad method", VALID.replace("#method get\n#description One", "#method put\n#description One"), |k| {
            matches!(k, ConfigErrorKind::BadMethod(_))
        }),
        ("duplicate field", VALID.replace("#title Items", "#title Items\n#title Again"), |k| {
            matches!(k, ConfigErrorKind::DuplicateField)
        }),
        ("missing sparql", VALID.replace("#sparql SELECT ?x WHERE { ?x ?p \"[[id]]\" }\n", ""), |k| {
            matches!(k, ConfigErrorKind::MissingField)
        }),
        ("unknown block type", VALID.replace("#type operation", "#type endpoint"), |k| {
            matches!(k, ConfigErrorKind::UnknownType(_))
        }),
        ("method not declared", VALID.replace("#method get\n#description One", "#method post\n#description One"), |k| {
            matches!(k, ConfigErrorKind::MethodNotDeclared(_))
        }),
        ("unknown parameter", VALID.replace("#field_type", "#preprocess lower(nope)\n#field_type"), |k| {
            matches!(k, ConfigErrorKind::UnknownParameter(_))
        }),
        ("bad process chain", VALID.replace("#field_type", "#preprocess lower(id\n#field_type"), |k| {
            matches!(k, ConfigErrorKind::BadProcessChain(_))
        }),
    ];
    for (name, text, expected) in &cases {
        match parse_document(text) {
            Ok(_) => return Err(format!("{name}: accepted")),
            Err(e) if expected(&e.kind) => {}
            Err(e) => return Err(format!("{name}: wrong class: {e}")),
        }
    }
    Ok(format!("fixture round-trips; {INVALID_CONFIGS} invalid configs rejected with their class"))
}

// 8

fn docs_and_dashboard(_: &Env) -> Result<String, String> {
    // a fresh instance so the counters start at zero
    let env = Env::start();
    let doc = env.manager.documents().next().unwrap();
    let page = render_docs(&doc.api, &doc.operations, Some("body { margin: 0 }"));
    let html = parse_html(&page);
    ensure(html.has_doctype(), || "no doctype".into())?;
    ensure(html.errors().is_empty(), || format!("parse errors: {:?}", html.errors()))?;
    for op in &doc.operations {
        let full = format!("{}{}", doc.api.url, op.url_template);
        let n = page.matches(&full).count();
        ensure(n == 1, || format!("{full} appears {n} times"))?;
    }

    let path = format!("/api/v1/citations/{CITED_DOI}");
    for _ in 0..3 {
        let reply = env.http("GET", &path, &[], None);
        ensure(reply.status == 200, || format!("{reply:?}"))?;
    }
    let unmatched = env.http("GET", "/api/v1/nothing-here", &[], None);
    ensure(unmatched.status == 404, || format!("{unmatched:?}"))?;

    let dashboard = env.http("GET", "/", &[], None);
    let html = parse_html(&dashboard.body);
    ensure(html.errors().is_empty(), || format!("dashboard parse errors: {:?}", html.errors()))?;
    let summary = html.by_id("summary").ok_or("no summary table")?;
    let read = |class: &str| -> Result<u64, String> {
        let cells = find_class(&summary, class);
        let cell = cells.first().ok_or_else(|| format!("no {class} cell"))?;
        text(cell).trim().parse().map_err(|e| format!("{class}: {e}"))
    };
    let counters = (read("calls-total")?, read("calls-2xx")?, read("calls-4xx")?);
    ensure(counters == (4, 3, 1), || format!("dashboard reads {counters:?}"))?;
    Ok(format!("docs valid, {} templates once each; dashboard total=4 2xx=3 4xx=1", doc.operations.len()))
}

// 9

fn no_op_law(env: &Env) -> Result<String, String> {
    let doc = env.manager.documents().next().unwrap();
    let op = doc.operations.iter().find(|o| o.url_template == "/citations-dated/{doi}").unwrap();
    ensure(op.preprocess.is_none() && op.postprocess.is_none(), || "operation has processing".into())?;

    let query = substitute(&op.sparql_template, [("doi", CITED_DOI)]);
    let raw = HttpEndpoint::default().dispatch(&env.mock.url(), &query, HttpMethod::Get).map_err(|e| e.to_string())?;
    let expected = serialize_json(&parse_results(&raw.body, &raw.media_type, &op.field_types).map_err(|e| e.to_string())?);
    let (status, body) = embedded(env, &format!("/api/v1/citations-dated/{CITED_DOI}"), "get", "json");
    ensure(status == 200 && body == expected, || format!("{status}: {body}\nexpected {expected}"))?;
    let http = env.http("GET", &format!("/api/v1/citations-dated/{CITED_DOI}"), &[], None);
    ensure(http.body == expected, || http.body.clone())?;
    let rows = serde_json::from_str::<Vec<Value>>(&body).map_err(|e| e.to_string())?.len();
    Ok(format!("{rows} rows byte-identical to the parsed endpoint response"))
}
