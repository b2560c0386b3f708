use std::io::Write;

fn main() {
    let env = std::env::var(fusion_ring::cli::RANK_LIMIT_ENV).ok();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = fusion_ring::cli::main_with(std::env::args_os(), env.as_deref(), &mut out, &mut err);
    let _ = out.flush();
    std::process::exit(code);
}
