fn main() {
    std::process::exit(perf_oracle::cli::run(std::env::args_os()));
}
