//! SVG plot of a run: rows, corridor centre lines and the driven path.

use std::fmt::Write as _;

use vinenav_core::log::RunLog;
use vinenav_core::sim::{ObstacleKind, World};

const SCALE: f64 = 20.0;
const MARGIN: f64 = 3.0;

pub fn trajectory_svg(log: &RunLog, world: &World) -> String {
    let c = &world.config;
    let mut min = (-MARGIN, -MARGIN);
    let mut max = (c.row_length + MARGIN, world.row_y(c.n_rows - 1) + MARGIN);
    for s in &log.trajectory {
        min = (min.0.min(s.pose.position.x - 1.0), min.1.min(s.pose.position.y - 1.0));
        max = (max.0.max(s.pose.position.x + 1.0), max.1.max(s.pose.position.y + 1.0));
    }
    // World y points up; SVG y points down.
    let px = |x: f64| (x - min.0) * SCALE;
    let py = |y: f64| (max.1 - y) * SCALE;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}">"#,
        (max.0 - min.0) * SCALE,
        (max.1 - min.1) * SCALE
    )
    .unwrap();
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for k in 0..c.corridors() {
        let y = py(world.corridor_center_y(k));
        writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
            px(0.0),
            px(c.row_length)
        )
        .unwrap();
    }
    for o in &world.obstacles {
        let fill = match o.kind {
            ObstacleKind::Pole => "saddlebrown",
            ObstacleKind::Vegetation => "forestgreen",
            ObstacleKind::Blocker => "black",
        };
        writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="{fill}"/>"#,
            px(o.center.x),
            py(o.center.y),
            (o.radius * SCALE).max(1.0)
        )
        .unwrap();
    }
    s.push_str("<polyline fill=\"none\" stroke=\"crimson\" stroke-width=\"1.5\" points=\"");
    for (i, p) in log.trajectory.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{:.2},{:.2}", px(p.pose.position.x), py(p.pose.position.y)).unwrap();
    }
    s.push_str("\"/>\n</svg>\n");
    s
}
