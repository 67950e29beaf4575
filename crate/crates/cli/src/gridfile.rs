//! Plain-text conformal factor grids: a first line `nx ny`, then `nx * ny`
//! strictly positive decimals, row-major over the fundamental domain with
//! no duplicated boundary row or column.

use std::path::Path;

use spinbound_core::ConformalFactorField;

use crate::error::{CliError, Result};

pub fn parse_grid_file(text: &str) -> Result<ConformalFactorField> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| CliError::spec("grid file is empty"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| CliError::spec(format!("bad grid header '{header}'")))
        })
        .collect::<Result<_>>()?;
    let [nx, ny] = dims[..] else {
        return Err(CliError::spec(format!("grid header must be 'nx ny', got '{header}'")));
    };
    let values: Vec<f64> = lines
        .flat_map(str::split_whitespace)
        .map(|t| t.parse().map_err(|_| CliError::spec(format!("bad grid value '{t}'"))))
        .collect::<Result<_>>()?;
    if values.len() != nx * ny {
        return Err(CliError::spec(format!(
            "grid header promises {nx} x {ny} = {} values, found {}",
            nx * ny,
            values.len()
        )));
    }
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(CliError::spec(format!(
            "grid value {v} at index {i} is not strictly positive"
        )));
    }
    Ok(ConformalFactorField::grid(nx, ny, values)?)
}

pub fn read_grid_file(path: impl AsRef<Path>) -> Result<ConformalFactorField> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_grid_file(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use spinbound_core::ConformalFactorField as F;

    #[test]
    fn parses_row_major() {
        let f = parse_grid_file("2 3\n1 2 3\n4 5 6\n").unwrap();
        let F::Grid(g) = f else { panic!("expected grid") };
        assert_eq!(g.dims(), (2, 3));
        assert_eq!(g.values(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn layout_free_after_header() {
        let a = parse_grid_file("2 2\n1.5 2.5 3.5 4.5").unwrap();
        let b = parse_grid_file("2 2\n\n1.5\n2.5\n3.5 4.5\n").unwrap();
        let (F::Grid(a), F::Grid(b)) = (a, b) else { panic!() };
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "",
            "2\n1 2",
            "2 2\n1 2 3",
            "2 2\n1 2 3 0",
            "2 2\n1 2 3 -1",
            "2 2\n1 2 3 x",
            "2 2\n1 2 3 inf",
        ] {
            let err = parse_grid_file(bad).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{bad}: {err}");
        }
    }

    #[test]
    fn missing_file_is_io() {
        let err = read_grid_file("/nonexistent/h.grid").unwrap_err();
        assert_eq!(err.exit_code(), 4);
        assert!(err.to_string().contains("/nonexistent/h.grid"));
    }
}
