use std::io::Write;

// Enumerators recurse on program depth; give them room.
const STACK_BYTES: usize = 512 << 20;

fn main() {
    let code = std::thread::Builder::new()
        .stack_size(STACK_BYTES)
        .spawn(|| {
            let stdout = std::io::stdout();
            let stderr = std::io::stderr();
            let mut out = std::io::BufWriter::new(stdout.lock());
            let code = ecoenum::cli::run(std::env::args_os(), &mut out, &mut stderr.lock());
            let _ = out.flush();
            code
        })
        .expect("spawn main thread")
        .join()
        .unwrap_or(ecoenum::cli::EXIT_INVARIANT);
    std::process::exit(code);
}
