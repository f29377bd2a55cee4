//! Compact string forms for kernels, graphs and graph kernels.
//!
//! - kernels: `linear`, `gaussian:S2`, `poly:DEGREE:OFFSET`,
//!   `gaussian-dict:LO:HI:COUNT`; comma-separated lists concatenate.
//! - graphs: `knn:K`, `dense`, `file:PATH`, `none`.
//! - graph kernels: `identity`, `diffusion:S2`, `random-walk:A:P`,
//!   `regularized:S2`, `bandlimited:BETA:B`.

use std::path::PathBuf;

use grad_dr::graphs::GraphKernelSpec;
use grad_dr::kernels::KernelSpec;

use crate::CliError;

fn num<T: std::str::FromStr>(field: &str, what: &str) -> Result<T, CliError> {
    field
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad number {field:?} in {what}")))
}

fn fields<'a>(s: &'a str, arity: usize, what: &str) -> Result<Vec<&'a str>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != arity + 1 {
        return Err(CliError::Usage(format!(
            "{what} {s:?} takes {arity} parameter(s) separated by ':'"
        )));
    }
    Ok(parts[1..].to_vec())
}

pub fn parse_kernels(s: &str) -> Result<Vec<KernelSpec>, CliError> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let name = item.split(':').next().unwrap_or("");
        match name {
            "linear" => {
                fields(item, 0, "kernel")?;
                out.push(KernelSpec::Linear);
            }
            "gaussian" => {
                let f = fields(item, 1, "kernel")?;
                out.push(KernelSpec::gaussian(num(f[0], item)?)?);
            }
            "poly" => {
                let f = fields(item, 2, "kernel")?;
                out.push(KernelSpec::polynomial(num(f[0], item)?, num(f[1], item)?)?);
            }
            "gaussian-dict" => {
                let f = fields(item, 3, "kernel")?;
                out.extend(KernelSpec::gaussian_dictionary(
                    num(f[0], item)?,
                    num(f[1], item)?,
                    num(f[2], item)?,
                )?);
            }
            _ => return Err(CliError::Usage(format!("unknown kernel {item:?}"))),
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("no kernel given".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Knn(usize),
    Dense,
    File(PathBuf),
    None,
}

pub fn parse_graphs(s: &str) -> Result<Vec<GraphSource>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|item| {
            let name = item.split(':').next().unwrap_or("");
            match name {
                "knn" => Ok(GraphSource::Knn(num(fields(item, 1, "graph")?[0], item)?)),
                "dense" => fields(item, 0, "graph").map(|_| GraphSource::Dense),
                "none" => fields(item, 0, "graph").map(|_| GraphSource::None),
                "file" => Ok(GraphSource::File(PathBuf::from(&item["file:".len()..]))),
                _ => Err(CliError::Usage(format!("unknown graph source {item:?}"))),
            }
        })
        .collect()
}

pub fn parse_graph_kernel(s: &str) -> Result<GraphKernelSpec, CliError> {
    let name = s.split(':').next().unwrap_or("");
    let spec = match name {
        "identity" => {
            fields(s, 0, "graph kernel")?;
            GraphKernelSpec::Identity
        }
        "diffusion" => GraphKernelSpec::Diffusion {
            sigma2: num(fields(s, 1, "graph kernel")?[0], s)?,
        },
        "regularized" => GraphKernelSpec::RegularizedLaplacian {
            sigma2: num(fields(s, 1, "graph kernel")?[0], s)?,
        },
        "random-walk" => {
            let f = fields(s, 2, "graph kernel")?;
            GraphKernelSpec::PStepRandomWalk {
                a: num(f[0], s)?,
                p: num(f[1], s)?,
            }
        }
        "bandlimited" => {
            let f = fields(s, 2, "graph kernel")?;
            GraphKernelSpec::Bandlimited {
                beta: num(f[0], s)?,
                bandwidth: num(f[1], s)?,
            }
        }
        _ => return Err(CliError::Usage(format!("unknown graph kernel {s:?}"))),
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dictionary_expands() {
        let k = parse_kernels("gaussian-dict:0.01:1:10").unwrap();
        assert_eq!(k.len(), 10);
        assert_eq!(k[0], KernelSpec::Gaussian { sigma2: 0.01 });
        assert_eq!(k[9], KernelSpec::Gaussian { sigma2: 1.0 });
    }

    #[test]
    fn kernel_lists_concatenate() {
        let k = parse_kernels("linear, poly:2:1").unwrap();
        assert_eq!(k, vec![KernelSpec::Linear, KernelSpec::Polynomial { degree: 2, offset: 1.0 }]);
    }

    #[test]
    fn bad_kernels_are_usage_errors() {
        for s in ["", "rbf:1", "gaussian", "gaussian:x", "gaussian:-1"] {
            assert!(parse_kernels(s).is_err(), "{s}");
        }
    }

    #[test]
    fn graph_sources() {
        let g = parse_graphs("knn:5,dense,file:a:b.txt").unwrap();
        assert_eq!(
            g,
            vec![GraphSource::Knn(5), GraphSource::Dense, GraphSource::File("a:b.txt".into())]
        );
    }

    #[test]
    fn graph_kernels() {
        assert_eq!(parse_graph_kernel("identity").unwrap(), GraphKernelSpec::Identity);
        assert_eq!(
            parse_graph_kernel("random-walk:2:3").unwrap(),
            GraphKernelSpec::PStepRandomWalk { a: 2.0, p: 3 }
        );
        assert!(parse_graph_kernel("random-walk:1:3").is_err());
        assert!(parse_graph_kernel("heat:1").is_err());
    }
}
