fn main() {
    // placeholder until cli module lands
    std::process::exit(0);
}
