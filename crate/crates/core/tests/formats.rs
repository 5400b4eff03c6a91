mod common;

use std::fs;

use histocell::dataset::{
    load_abundance_table, load_embedding_block, load_spot_table, load_spot_table_with_blocks, write_abundance_table,
    write_embedding_block, write_spot_table, EmbeddingBlock,
};
use histocell::experiments::{generate_synthetic, SyntheticSpec};
use histocell::regressor::{checkpoint_to_string, fit, load_checkpoint, save_checkpoint, TrainConfig};
use histocell::spatial::{colocalization_from_coords, ColocMatrix};
use ndarray::s;

fn spec() -> SyntheticSpec {
    SyntheticSpec {
        n_patients: 2,
        spots_per_patient: 40,
        dim: 6,
        n_cell_types: 4,
        noise_sigma: 0.3,
        ..SyntheticSpec::default()
    }
}

#[test]
fn tables_round_trip_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (spots, abund) = generate_synthetic(&spec()).unwrap();
    let (s1, a1) = (dir.path().join("s1.csv"), dir.path().join("a1.csv"));
    write_spot_table(&spots, &s1).unwrap();
    write_abundance_table(&abund, &a1).unwrap();
    let spots2 = load_spot_table(&s1).unwrap();
    let abund2 = load_abundance_table(&a1, &spots2).unwrap();
    assert_eq!(spots2, spots);
    assert_eq!(abund2, abund);
    let (s2, a2) = (dir.path().join("s2.csv"), dir.path().join("a2.csv"));
    write_spot_table(&spots2, &s2).unwrap();
    write_abundance_table(&abund2, &a2).unwrap();
    assert_eq!(fs::read(&s1).unwrap(), fs::read(&s2).unwrap());
    assert_eq!(fs::read(&a1).unwrap(), fs::read(&a2).unwrap());
}

#[test]
fn embedding_blocks_round_trip_and_concatenate_on_load() {
    let dir = tempfile::tempdir().unwrap();
    let (spots, _) = generate_synthetic(&spec()).unwrap();
    let ids = spots.spot_ids().to_vec();
    let a = EmbeddingBlock::new("uni", ids.clone(), spots.embeddings().slice(s![.., ..2]).to_owned()).unwrap();
    let b = EmbeddingBlock::new("conch", ids, spots.embeddings().slice(s![.., 2..]).to_owned()).unwrap();
    let (pa, pb) = (dir.path().join("uni.csv"), dir.path().join("conch.csv"));
    write_embedding_block(&a, &pa).unwrap();
    write_embedding_block(&b, &pb).unwrap();
    let a2 = load_embedding_block(&pa).unwrap();
    assert_eq!(a2.source_name, "uni");
    assert_eq!(a2.values(), a.values());
    let again = dir.path().join("uni2.csv");
    write_embedding_block(&a2, &again).unwrap();
    assert_eq!(fs::read(&pa).unwrap(), fs::read(&again).unwrap());

    // a spots file without inline embeddings picks them up from the blocks
    let bare = dir.path().join("bare.csv");
    let mut text = String::from("spot_id,sample_id,patient_id,x,y\n");
    for i in 0..spots.len() {
        let c = spots.coords();
        text.push_str(&format!(
            "{},{},{},{:?},{:?}\n",
            spots.spot_ids()[i],
            spots.sample_ids()[i],
            spots.patient_ids()[i],
            c[[i, 0]],
            c[[i, 1]]
        ));
    }
    fs::write(&bare, text).unwrap();
    let joined = load_spot_table_with_blocks(&bare, &[&pa, &pb]).unwrap();
    assert_eq!(joined.embeddings(), spots.embeddings());
}

#[test]
fn checkpoint_round_trips_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (spots, abund) = generate_synthetic(&spec()).unwrap();
    let cfg = TrainConfig {
        hidden_width: 8,
        epochs: 3,
        batch_size: 16,
        ..TrainConfig::default()
    };
    let model = fit(spots.embeddings(), abund.values(), abund.cell_types().to_vec(), &cfg).unwrap().model;
    let p1 = dir.path().join("m1.ckpt");
    save_checkpoint(&model, &p1).unwrap();
    let loaded = load_checkpoint(&p1).unwrap();
    assert_eq!(loaded, model);
    let p2 = dir.path().join("m2.ckpt");
    save_checkpoint(&loaded, &p2).unwrap();
    assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    assert_eq!(checkpoint_to_string(&loaded), fs::read_to_string(&p1).unwrap());
    assert_eq!(loaded.forward(spots.embeddings()).unwrap(), model.forward(spots.embeddings()).unwrap());
}

#[test]
fn coloc_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (spots, abund) = generate_synthetic(&spec()).unwrap();
    let rows = spots.samples()["P01_S1"].clone();
    let sub = spots.subset(&rows);
    let m = colocalization_from_coords(&abund.subset(&rows), sub.coords(), 150.0, "P01_S1").unwrap();
    let p = dir.path().join("coloc.csv");
    m.save_csv(&p).unwrap();
    let back = ColocMatrix::load_csv(&p, "P01_S1").unwrap();
    assert_eq!(back.cell_types, m.cell_types);
    assert_eq!(back.to_csv(), m.to_csv());
}

#[test]
fn corrupted_checkpoint_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.ckpt");
    fs::write(&p, "histocell-mlp v1\nlayer_dims,2,x\n").unwrap();
    let err = load_checkpoint(&p).unwrap_err().to_string();
    assert!(err.contains(":2:"), "{err}");
}
