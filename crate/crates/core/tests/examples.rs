macro_rules! example {
    ($module:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(basic_block, "basic_block.rs");
example!(sample_circuits, "sample_circuits.rs");
example!(error_surface, "error_surface.rs");
example!(train_iris, "train_iris.rs");
example!(wine_pca, "wine_pca.rs");
example!(depth_sweep, "depth_sweep.rs");
example!(noise_curve, "noise_curve.rs");

#[test]
fn examples_run() {
    basic_block::run().unwrap();
    sample_circuits::run().unwrap();
    error_surface::run().unwrap();
    train_iris::run().unwrap();
    wine_pca::run().unwrap();
    depth_sweep::run().unwrap();
    noise_curve::run().unwrap();
}
