//! Prints the builtin decision tree in the human-readable file format.

fn main() {
    let tree = disseg_core::segmenter::builtin_fig7_tree();
    print!("{}", disseg_core::segmenter::serialize_tree_text(&tree));
}
