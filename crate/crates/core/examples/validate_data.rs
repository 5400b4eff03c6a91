//! Dataset validation: every problem in a spots/abundances pair is reported
//! with its file and line.

use histocell::dataset::scan_dataset;

fn main() -> histocell::Result<()> {
    let dir = std::env::temp_dir().join("histocell-validate");
    std::fs::create_dir_all(&dir).expect("create temp dir");
    let spots = dir.join("spots.csv");
    let abundances = dir.join("abundances.csv");
    std::fs::write(
        &spots,
        "spot_id,sample_id,patient_id,x,y,e0,e1\n\
         s1,A1,A,10,10,0.1,0.2\n\
         s2,A1,A,20,10,NaN,0.3\n\
         s1,A1,A,30,10,0.5,0.1\n\
         s4,A1,B,40,10,0.2,0.2\n",
    )
    .expect("write spots");
    std::fs::write(
        &abundances,
        "spot_id,B_cells,T_cells\ns1,0.5,1.0\ns2,-0.2,0.3\ns4,0.1,0.1\n",
    )
    .expect("write abundances");

    let findings = scan_dataset(&spots, &abundances)?;
    for f in &findings {
        println!("{f}");
    }
    println!("{} finding(s)", findings.len());
    Ok(())
}
