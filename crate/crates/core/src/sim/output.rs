use std::io::{self, Write};

use super::Trajectory;

/// Writes `t`, the states and the boundary variables, one row per sample.
pub fn write_csv(traj: &Trajectory, out: &mut impl Write) -> io::Result<()> {
    let states = traj.x.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_owned()];
    header.extend((0..states).map(|i| format!("x_{i}")));
    header.extend(traj.output_names.iter().map(|s| s.to_string()));
    writeln!(out, "{}", header.join(","))?;
    for (k, t) in traj.t.iter().enumerate() {
        let row: Vec<String> = std::iter::once(t)
            .chain(&traj.x[k])
            .chain(&traj.outputs[k])
            .map(|v| format!("{v:.16e}"))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::Sym;

    #[test]
    fn header_and_rows() {
        let traj = Trajectory {
            t: vec![0.0, 0.5],
            x: vec![vec![1.0], vec![0.5]],
            output_names: vec![Sym::flow(0)],
            outputs: vec![vec![2.0], vec![-1.0]],
            iterations: 2,
        };
        let mut buf = Vec::new();
        write_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x_0,f_0");
        assert_eq!(lines[2], "5.0000000000000000e-1,5.0000000000000000e-1,-1.0000000000000000e0");
    }
}
