//! Write and read an EMB1 embedding file, the exchange format for
//! externally computed backbone embeddings.

use ndarray::Array2;
use speechcmd::storage::{encode_embeddings, read_embeddings, write_embeddings, EmbeddingMatrix};

fn main() -> speechcmd::Result<()> {
    let values = Array2::from_shape_fn((3, 4), |(i, j)| (i * 4 + j) as f32 * 0.25 - 1.0);
    let matrix = EmbeddingMatrix { values };

    let bytes = encode_embeddings(&matrix)?;
    let header: Vec<String> = bytes[..12].iter().map(|b| format!("{b:02x}")).collect();
    println!("header: {}  (magic, n_rows, dim)", header.join(" "));
    println!(
        "file size: {} bytes = 12 + 4 x {} x {}",
        bytes.len(),
        matrix.n_rows(),
        matrix.dim()
    );

    let path = std::env::temp_dir().join("speechcmd-example.emb1");
    write_embeddings(&matrix, &path)?;
    let back = read_embeddings(&path)?;
    println!("round trip exact: {}", back == matrix);
    println!("{}", back.values);
    Ok(())
}
