fn main() {
    std::process::exit(toric_kstab::run(std::env::args_os()));
}
