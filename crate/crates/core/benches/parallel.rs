//! Sequential against rayon execution of a full table audit.

use criterion::{criterion_group, criterion_main, Criterion};
use curvlab::audit::{audit_table, Mode, TableId};
use curvlab::curvature::ModuleAtlas;
use curvlab::par::Exec;

fn table_audit(c: &mut Criterion) {
    // Build the cached atlas outside the timed region.
    ModuleAtlas::get(3).unwrap();
    let mut g = c.benchmark_group("audit_ric6_n3");
    g.sample_size(10);
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        g.bench_function(name, |b| b.iter(|| audit_table(TableId::Ric6, 3, None, Mode::Exact, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, table_audit);
criterion_main!(benches);
