// Regenerates the frozen interaction-ratio floor constant.
fn main() {
    let found = csd_core::estimates::interaction_floor_search();
    println!("search minimum = {found}");
    println!("frozen floor (0.99x) = {}", 0.99 * found);
}
