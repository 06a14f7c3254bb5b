use pyo3::prelude::*;
use pyo3::types::PyDict;

fn run(code: &str) {
    Python::initialize();
    Python::attach(|py| {
        let module = pyo3::wrap_pymodule!(wishart_spectra::wishart_spectra)(py);
        let globals = PyDict::new(py);
        globals.set_item("ws", module).unwrap();
        let code = std::ffi::CString::new(code).unwrap();
        py.run(&code, Some(&globals), None)
            .unwrap_or_else(|e| panic!("{e}"));
    });
}

#[test]
fn moments_and_densities() {
    run(r#"
assert ws.mp_moments(2.0, 3) == [2.0, 6.0, 22.0]
assert abs(ws.bernoulli_moments(ws.BernoulliParams(2.0, 20.0), 2)[1] - 6.1) < 1e-13
assert len(ws.count_table(3)) > 0
assert ws.mp_density(-1.0, 2.0) == 0.0
"#);
}

#[test]
fn errors_map_to_python_exceptions() {
    run(r#"
for bad in (lambda: ws.count_table(99), lambda: ws.BernoulliParams(1.0, -1.0), lambda: ws.HeavyTailParams(3.5, 1.0, 1.0)):
    try:
        bad()
    except (ws.ResourceLimitError, ValueError):
        pass
    else:
        raise AssertionError("no exception")
try:
    ws.mp_stieltjes(complex(1.0, -1.0), 2.0)
except ValueError:
    pass
else:
    raise AssertionError("lower half-plane accepted")
"#);
}

#[test]
fn samples_are_deterministic() {
    run(r#"
p = ws.HeavyTailParams(2.0, 1.0, 1.5)
a = ws.sample_wishart_heavy(60, p, 4)
b = ws.sample_wishart_heavy(60, p, 4)
assert a.eigenvalues == b.eigenvalues and a.m == 90
assert abs(sum(a.moments(1)) - sum(a.eigenvalues) / 60) < 1e-12
"#);
}
