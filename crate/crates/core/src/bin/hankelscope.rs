use clap::Parser;
use hankelscope::cli::{main_with, Cli};

fn main() {
    // Sequential kernels keep repeated runs bit-identical.
    faer::set_global_parallelism(faer::Par::Seq);
    std::process::exit(main_with(Cli::parse()));
}
