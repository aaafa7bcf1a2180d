fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("GRIDSHADE_LOG")).init();
    std::process::exit(gridshade::report::cli_main(std::env::args_os()));
}
