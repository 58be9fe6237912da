use spectral_cones::engines::{ipm_project, IpmOpts, LogModel};
use spectral_cones::types::{ConeKind, ConeSpec, VPoint};
use spectral_cones::vcones::kkt_report;

fn main() {
    let model = LogModel { n: 1 };
    let target = VPoint::with_v(-1.0, 1.0, vec![1.0]);
    let res = ipm_project(&model, &target, &IpmOpts { max_iters: 200, tol: 1e-12 });
    println!("status {:?} iters {}", res.status, res.iters);
    println!("point {:?}", res.point);
    let spec = ConeSpec::new(ConeKind::Log, 1).unwrap();
    let rep = kkt_report(&spec, &target, &res.point, &res.multipliers);
    println!("kkt {rep:?}");
}
