//! The `dexmix` binary driven end to end through its subcommands.

use std::path::Path;
use std::process::{Command, Output};

fn dexmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dexmix")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_then_run_cluster_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    let out = dexmix(&[
        "simulate", "--transcripts", "30", "--de", "4", "--reads", "1500", "--seed", "3", "--out", path(&sim),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["catalog.tsv", "cond_a_rep1.tsv", "cond_a_rep2.tsv", "cond_b_rep1.tsv", "cond_b_rep2.tsv", "truth.tsv"] {
        assert!(sim.join(f).exists(), "{f} missing");
    }
    let cond = |c: &str| format!("{},{}", path(&sim.join(format!("cond_{c}_rep1.tsv"))), path(&sim.join(format!("cond_{c}_rep2.tsv"))));
    let (cond_a, cond_b) = (cond("a"), cond("b"));
    let catalog = sim.join("catalog.tsv");

    for sampler in ["collapsed", "rjmcmc"] {
        let res = dir.path().join(sampler);
        let out = dexmix(&[
            "run", "--catalog", path(&catalog), "--cond-a", &cond_a, "--cond-b", &cond_b, "--sampler", sampler,
            "--chains", "2", "--iters", "400", "--burnin", "100", "--thin", "2", "--prior", "fixed:0.3", "--rule",
            "naive", "--seed", "5", "--out", path(&res), "--dump-draws", "--cluster-dump",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let est = std::fs::read_to_string(res.join("estimates.tsv")).unwrap();
        assert!(est.starts_with("transcript_id\tcluster\tp_de\ttheta_mean\tw_mean\tlog2fc\tdecision\tflag\n"));
        assert_eq!(est.lines().count(), 31);
        let dec = std::fs::read_to_string(res.join("decisions.tsv")).unwrap();
        assert!(dec.starts_with("rank\ttranscript_id\tp_de\tcumulative_expected_fdr\tdecision\n"));
        assert!(std::fs::read_to_string(res.join("diagnostics.csv")).unwrap().starts_with("kind,cluster,index,value\n"));
        assert!(res.join("clusters.tsv").exists());
        assert!(std::fs::read_dir(res.join("draws")).unwrap().count() > 0);
    }

    let out = dexmix(&["cluster", "--catalog", path(&catalog), "--cond-a", &cond_a, "--cond-b", &cond_b]);
    assert!(out.status.success());
    assert!(!out.stdout.is_empty());

    let tiny = dir.path().join("tiny");
    std::fs::create_dir(&tiny).unwrap();
    std::fs::write(tiny.join("catalog.tsv"), "x\t500\ny\t500\n").unwrap();
    std::fs::write(tiny.join("a.tsv"), "r1\t2\tx:0.5;y:0.5\nr2\t1\tx:1\n").unwrap();
    std::fs::write(tiny.join("b.tsv"), "s1\t1\ty:1\n").unwrap();
    let out = dexmix(&[
        "oracle", "--catalog", path(&tiny.join("catalog.tsv")), "--cond-a", path(&tiny.join("a.tsv")), "--cond-b",
        path(&tiny.join("b.tsv")),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("transcript_id\tp_de\ttheta_mean\tw_mean\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.tsv");
    let out = dexmix(&[
        "run", "--catalog", path(&missing), "--cond-a", path(&missing), "--cond-b", path(&missing), "--out",
        path(dir.path()),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    let out = dexmix(&["run", "--catalog", "x", "--cond-a", "x", "--cond-b", "x", "--out", "o", "--fdr", "1.5"]);
    assert!(!out.status.success());
}
