//! Bivariate Moran's R between cell types, a clustered SVG heatmap and the
//! agreement between two colocalization matrices.
//!
//! ```text
//! cargo run --example colocalization -- [heatmap.svg]
//! ```

use histocell::dataset::AbundanceMatrix;
use histocell::spatial::{
    colocalization_from_coords, compare_colocalization, median_nearest_neighbor, render_heatmap, upgma_order,
};
use ndarray::Array2;

fn main() -> histocell::Result<()> {
    // a 20 x 20 grid with a tumor region on the left and stroma on the right
    let side = 20;
    let n = side * side;
    let coords = Array2::from_shape_fn((n, 2), |(i, k)| if k == 0 { (i % side) as f64 } else { (i / side) as f64 } * 100.0);
    let types = ["Cancer_epithelial", "Myeloid", "CAFs", "Endothelial", "T_cells"];
    let values = Array2::from_shape_fn((n, types.len()), |(i, k)| {
        let (x, y) = ((i % side) as f64 / side as f64, (i / side) as f64 / side as f64);
        let wobble = ((i * 7919 + k * 104_729) % 97) as f64 / 970.0;
        match k {
            0 => 2.0 * (1.0 - x) + wobble,
            1 => 1.2 * (1.0 - x) + 0.3 * y + wobble,
            2 => 1.5 * x + wobble,
            3 => x * y + wobble,
            _ => 0.5 + wobble,
        }
    });
    let ids: Vec<String> = (0..n).map(|i| format!("spot{i:03}")).collect();
    let truth = AbundanceMatrix::new(ids.clone(), types.iter().map(|s| s.to_string()).collect(), values)?;

    let l = 1.5 * median_nearest_neighbor(coords.view())?;
    let m = colocalization_from_coords(&truth, coords.view(), l, "example section")?;
    for (a, name) in m.cell_types.iter().enumerate() {
        let row: Vec<String> = (0..m.len())
            .map(|b| m.get(a, b).map_or("  NA  ".into(), |v| format!("{v:+.3}")))
            .collect();
        println!("{name:>17}: {}", row.join(" "));
    }

    let shifted = AbundanceMatrix::new(ids, truth.cell_types().to_vec(), truth.values().mapv(|v| 1.1 * v + 0.05))?;
    let ms = colocalization_from_coords(&shifted, coords.view(), l, "rescaled copy")?;
    let cmp = compare_colocalization(&ms, &m)?;
    println!("rescaled copy vs original: cosine {:.3} correlation {:.3}", cmp.cosine, cmp.correlation);

    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| std::env::temp_dir().join("histocell-coloc.svg").display().to_string());
    std::fs::write(&path, render_heatmap(&m, &upgma_order(&m))?).expect("write heatmap");
    println!("heatmap written to {path}");
    Ok(())
}
