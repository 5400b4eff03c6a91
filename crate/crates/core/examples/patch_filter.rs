//! Background filtering: measure the white fraction of spot patches cut from
//! a slide image and drop mostly-empty spots.

use std::collections::HashMap;

use histocell::experiments::{generate_synthetic, SyntheticSpec};
use histocell::patchprep::{
    background_fraction, filter_spots, patch_bbox, PatchRaster, DEFAULT_MAX_BACKGROUND, DEFAULT_PATCH_SIZE,
    DEFAULT_WHITE_THRESHOLD,
};

fn main() -> histocell::Result<()> {
    let (spots, _) = generate_synthetic(&SyntheticSpec {
        n_patients: 1,
        spots_per_patient: 25,
        grid_pitch: 250.0,
        ..SyntheticSpec::default()
    })?;

    // tissue only on the left half of the slide
    let (w, h) = (1600u32, 1600u32);
    let slide: Vec<[u8; 3]> = (0..w * h)
        .map(|i| if i % w < w / 2 { [190, 120, 170] } else { [245, 245, 245] })
        .collect();

    let coords = spots.coords();
    let mut fractions = HashMap::new();
    for (i, id) in spots.spot_ids().iter().enumerate() {
        let c = coords.row(i);
        let bb = patch_bbox(c[0], c[1], DEFAULT_PATCH_SIZE, w, h)?;
        let mut pixels = Vec::with_capacity((bb.size * bb.size) as usize);
        for y in bb.y0..bb.y0 + bb.size {
            for x in bb.x0..bb.x0 + bb.size {
                pixels.push(slide[(y * w + x) as usize]);
            }
        }
        let patch = PatchRaster::new(bb.size, bb.size, pixels)?;
        fractions.insert(id.clone(), background_fraction(&patch, DEFAULT_WHITE_THRESHOLD));
    }
    let kept = filter_spots(&spots, &fractions, DEFAULT_MAX_BACKGROUND)?;
    println!("kept {} of {} spots", kept.len(), spots.len());
    Ok(())
}
