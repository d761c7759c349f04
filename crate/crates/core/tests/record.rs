use nrlgt_core::oracle::*;
use nrlgt_core::Topology;
use nrlgt_core::oracle::CurveKind;

#[test]
fn record_line_round_trip() {
    let rec = DatasetRecord {
        topology: Topology::Qsn,
        n: 4,
        directed: true,
        attack: AttackKind::TargetedBetweenness,
        rc: 0.1 + 0.2,
        curve: vec![1.0 / 3.0, 0.5, 1.0],
    };
    let line = rec.to_line();
    assert!(line.starts_with("QSN,4,true,TBA,0.30000000000000004,"));
    assert_eq!(DatasetRecord::from_line(&line).unwrap(), rec);
}

#[test]
fn malformed_records() {
    assert!(DatasetRecord::from_line("ER,3,true,RA,0.5,1.0").is_err());
    assert!(DatasetRecord::from_line("XX,2,true,RA,0.5,1.0").is_err());
    assert!(DatasetRecord::from_line("ER,2,maybe,RA,0.5,1.0").is_err());
    assert!(DatasetRecord::from_line("ER,2,true,ZZ,0.5,1.0").is_err());
    assert!(DatasetRecord::from_line("ER,2,true,RA,0.5,abc").is_err());
    assert!(DatasetRecord::from_line("ER,2,true,RA,0.5,1.0").is_ok());
}

#[test]
fn csv_export() {
    let c = RobustnessCurve::new(CurveKind::Connectivity, vec![0.5, 1.0]);
    assert_eq!(curve_csv(&c), "i,value\n1,0.5\n2,1\n");
}
