fn main() {
    std::process::exit(dtcore::dtcli::run(std::env::args_os()));
}
