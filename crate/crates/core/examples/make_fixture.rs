//! Regenerates the bundled fixtures under `fixtures/`:
//!
//! ```text
//! cargo run -p mrsne --example make_fixture
//! ```

#[path = "../tests/common/mod.rs"]
mod common;

use std::fs;
use std::path::Path;

use mrsne::io::save_matrix;
use ndarray::Array2;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let synthetic = root.join("synthetic");
    fs::create_dir_all(&synthetic)?;
    let data = common::latent_clusters(45, 6, 15, 4, 1);
    common::write_dataset(&data.dataset, &synthetic);

    let names: Vec<String> = data
        .cluster2
        .iter()
        .enumerate()
        .map(|(j, c)| format!("c{c}_tag{j}"))
        .collect();
    fs::write(synthetic.join("tag_names.txt"), names.join("\n") + "\n")?;
    fs::write(
        synthetic.join("data.toml"),
        "domain1 = \"x1.txt\"\ndomain2 = \"x2.txt\"\ncross_graph = \"w.txt\"\nlabels2 = \"tag_names.txt\"\n",
    )?;

    // Same images and links, but every tag is a one-hot vector, so all tag
    // distances are equal.
    let onehot = root.join("onehot");
    fs::create_dir_all(&onehot)?;
    save_matrix(&Array2::eye(data.dataset.n2()), &onehot.join("tags.txt"))?;
    fs::write(
        onehot.join("data.toml"),
        "domain1 = \"../synthetic/x1.txt\"\ndomain2 = \"tags.txt\"\ncross_graph = \"../synthetic/w.txt\"\n",
    )?;
    Ok(())
}
