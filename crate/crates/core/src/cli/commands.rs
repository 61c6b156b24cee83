use nalgebra::{DVector, Matrix2};
use rayon::prelude::*;

use super::manifest::RunContext;
use super::output::{Cell, Format, Table};
use super::*;
use crate::error::{Error, Result};
use crate::estimation::{
    cold_start, fit_filter, fit_mle, sliding_window_fit, FitConfig, FitResult, SlidingConfig, MIN_WINDOW,
};
use crate::kalman::{filter_pass, univariate_filter_pass, DiffuseInit, FilterOutput};
use crate::prediction::{kinematics, predict_k, Prediction};
use crate::rng::SeededRng;
use crate::state_space::{
    build_single, model_from_params, stack, CovarianceMode, ModelDocument, ParamVector, SingleEntityModel,
    STATE_DIM,
};
use crate::svg::{Figure, BLUE, GREEN, PALETTE, RED};
use crate::synthetic::{scripted_dataset, simulate};
use crate::trajectory::{
    denormalize, normalize_unit, parse_tracking_csv, serialize_tracking_csv, sliding_windows,
    unflatten_points, FieldSpec, Point, TrackingSeries,
};
use crate::vae::{self, TrainConfig, VaeConfig, VaeParams};

const FIGURE_WIDTH: f64 = 900.0;

pub fn dispatch(command: &Command, ctx: &mut RunContext) -> Result<()> {
    match command {
        Command::Simulate(a) => run_simulate(a, ctx),
        Command::Filter(a) => run_filter(a, ctx),
        Command::Estimate(a) => run_estimate(a, ctx),
        Command::Predict(a) => run_predict(a, ctx),
        Command::Kinematics(a) => run_kinematics(a, ctx),
        Command::Vae(VaeCommand::Train(a)) => run_vae_train(a, ctx),
        Command::Vae(VaeCommand::Reconstruct(a)) => run_vae_reconstruct(a, ctx),
        Command::Vae(VaeCommand::Generate(a)) => run_vae_generate(a, ctx),
        Command::Plot(a) => run_plot(a, ctx),
    }
}

fn load_series(input: &InputArgs, ctx: &mut RunContext) -> Result<Vec<TrackingSeries>> {
    let text = ctx.read(&input.input)?;
    parse_tracking_csv(&text, &FieldSpec::default(), input.dt)
}

fn find_entity(series: &[TrackingSeries], id: u32) -> Result<&TrackingSeries> {
    series
        .iter()
        .find(|s| s.entity_id == id)
        .ok_or_else(|| Error::InvalidArgument(format!("entity {id} not present in input")))
}

fn observations(series: &TrackingSeries) -> Vec<Vec<Option<f64>>> {
    series.samples.iter().map(|s| vec![s.map(|p| p.x), s.map(|p| p.y)]).collect()
}

fn segments(points: &[Option<Point>]) -> Vec<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    for p in points {
        match p {
            Some(p) => current.push((p.x, p.y)),
            None if !current.is_empty() => out.push(std::mem::take(&mut current)),
            None => {}
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

fn write_table(ctx: &mut RunContext, path: &std::path::Path, table: &Table, format: Format) -> Result<()> {
    ctx.write(path, &table.render(format))
}

fn diag_model(dt: f64, q: f64, sigma: f64) -> Result<SingleEntityModel> {
    build_single(dt, Matrix2::identity() * q, [sigma, sigma], CovarianceMode::LogCholesky)
}

fn run_simulate(a: &SimulateArgs, ctx: &mut RunContext) -> Result<()> {
    ctx.seed = Some(a.seed);
    if !(1..=23).contains(&a.entities) {
        return Err(Error::InvalidArgument(format!("--entities must be 1 to 23, got {}", a.entities)));
    }
    if a.steps == 0 {
        return Err(Error::InvalidArgument("--steps must be at least 1".into()));
    }
    let model = diag_model(a.dt, a.q, a.sigma)?;
    let stacked = stack(&vec![model; a.entities])?;
    let mut init = DVector::zeros(stacked.state_dim());
    for e in 0..a.entities {
        init[STATE_DIM * e] = -4000.0 + 1600.0 * (e % 6) as f64;
        init[STATE_DIM * e + 1] = -2400.0 + 1600.0 * (e / 6) as f64;
    }
    let scenario = simulate(&stacked.system(), a.steps, a.seed, &init)?;
    let first_id = if a.entities == 23 { 0 } else { 1 };
    let series = scenario.to_series(a.dt, first_id, Some(&FieldSpec::default()))?;
    match a.out.format {
        Format::Csv => ctx.write(&a.out.output, &serialize_tracking_csv(&series))?,
        Format::Json => {
            let mut t = Table::new(&["frame", "entity_id", "x_cm", "y_cm"]);
            for frame in 0..a.steps {
                for s in &series {
                    if let Some(p) = s.samples[frame] {
                        t.push(vec![frame.into(), s.entity_id.into(), p.x.into(), p.y.into()]);
                    }
                }
            }
            write_table(ctx, &a.out.output, &t, Format::Json)?;
        }
    }
    if let Some(path) = &a.truth {
        let mut t = Table::new(&["frame", "entity_id", "x", "y", "vx", "vy"]);
        for (frame, z) in scenario.truth.iter().enumerate() {
            for e in 0..a.entities {
                let b = STATE_DIM * e;
                t.push(vec![
                    frame.into(),
                    (first_id + e as u32).into(),
                    z[b].into(),
                    z[b + 1].into(),
                    z[b + 2].into(),
                    z[b + 3].into(),
                ]);
            }
        }
        write_table(ctx, path, &t, a.out.format)?;
    }
    Ok(())
}

fn entity_models(opts: &ModelOptions, dt: f64, count: usize, ctx: &mut RunContext) -> Result<Vec<SingleEntityModel>> {
    match &opts.model {
        None => Ok(vec![diag_model(dt, opts.q, opts.sigma)?; count]),
        Some(path) => {
            let doc = ModelDocument::from_json(&ctx.read(path)?)?;
            let stacked = doc.to_stacked()?;
            if (stacked.dt - dt).abs() > 1e-12 {
                return Err(Error::InvalidModel(format!("model dt {} differs from --dt {dt}", stacked.dt)));
            }
            match stacked.entities.len() {
                1 => Ok(vec![stacked.entities[0].clone(); count]),
                n if n == count => Ok(stacked.entities),
                n => Err(Error::InvalidModel(format!("model has {n} entities, input has {count}"))),
            }
        }
    }
}

fn run_filter(a: &FilterArgs, ctx: &mut RunContext) -> Result<()> {
    let all = load_series(&a.input, ctx)?;
    let selected: Vec<&TrackingSeries> = match a.entity {
        Some(id) => vec![find_entity(&all, id)?],
        None => all.iter().collect(),
    };
    let models = entity_models(&a.model, a.input.dt, selected.len(), ctx)?;
    let init = match a.init.mode() {
        crate::kalman::InitMode::ExactDiffuse => DiffuseInit::exact(STATE_DIM),
        crate::kalman::InitMode::LargeKappa(k) => DiffuseInit::large_kappa(STATE_DIM, k),
    };
    let outputs: Vec<FilterOutput> = selected
        .par_iter()
        .zip(models.par_iter())
        .map(|(s, m)| {
            let obs = observations(s);
            if a.univariate {
                univariate_filter_pass(&m.system(), &obs, &init)
            } else {
                filter_pass(&m.system(), &obs, &init)
            }
        })
        .collect::<Result<_>>()?;

    let mut t = Table::new(&[
        "t", "entity", "x", "y", "vx", "vy", "p11", "p21", "p22", "p31", "p32", "p33", "p41", "p42", "p43", "p44",
    ]);
    for (s, out) in selected.iter().zip(&outputs) {
        for (i, st) in out.filtered.iter().enumerate() {
            let mut row: Vec<Cell> = vec![i.into(), s.entity_id.into()];
            row.extend((0..4).map(|j| Cell::from(st.mean[j])));
            for r in 0..4 {
                for c in 0..=r {
                    row.push(st.cov[(r, c)].into());
                }
            }
            t.push(row);
        }
        println!("entity {}: {} steps, log-likelihood {}", s.entity_id, out.filtered.len(), out.loglik());
    }
    write_table(ctx, &a.out.output, &t, a.out.format)?;

    if let Some(path) = &a.plot {
        let mut fig = Figure::pitch(&FieldSpec::default(), FIGURE_WIDTH, "observed and filtered positions");
        for (s, out) in selected.iter().zip(&outputs) {
            for seg in segments(&s.samples) {
                fig.polyline(&seg, RED, 1.0);
            }
            let filtered: Vec<(f64, f64)> = out.filtered.iter().map(|st| (st.mean[0], st.mean[1])).collect();
            fig.polyline(&filtered, BLUE, 1.0);
        }
        fig.legend("observed", RED);
        fig.legend("filtered", BLUE);
        ctx.write(path, &fig.render())?;
    }
    Ok(())
}

fn fit_config(w: &WindowOptions) -> FitConfig {
    FitConfig { init: w.init.mode(), ..FitConfig::default() }
}

fn fit_cells(fit: Option<&FitResult>) -> Vec<Cell> {
    match fit {
        Some(f) => {
            let q = f.accel_cov();
            let s = f.sigma();
            vec![
                f.loglik.into(),
                s[0].into(),
                s[1].into(),
                q[(0, 0)].into(),
                q[(1, 0)].into(),
                q[(0, 1)].into(),
                q[(1, 1)].into(),
                f.converged.into(),
            ]
        }
        None => {
            let mut v = vec![Cell::Empty; 7];
            v.push(false.into());
            v
        }
    }
}

const ESTIMATE_COLUMNS: [&str; 9] =
    ["window_start", "loglik", "sigma_x", "sigma_y", "q11", "q21", "q12", "q22", "converged"];

fn run_estimate(a: &EstimateArgs, ctx: &mut RunContext) -> Result<()> {
    let all = load_series(&a.input, ctx)?;
    let series = find_entity(&all, a.window.entity)?;
    let mode: CovarianceMode = a.window.mode.into();
    let config = fit_config(&a.window);
    let mut t = Table::new(&ESTIMATE_COLUMNS);
    if a.full_series {
        let fit = fit_mle(&observations(series), a.input.dt, &cold_start(mode), &config)?;
        let mut row: Vec<Cell> = vec![0usize.into()];
        row.extend(fit_cells(Some(&fit)));
        t.push(row);
        println!(
            "full series: log-likelihood {}, {} iterations, converged {}",
            fit.loglik, fit.iterations, fit.converged
        );
        if let Some(path) = &a.model_out {
            let model = model_from_params(a.input.dt, &fit.params)?;
            ctx.write(path, &ModelDocument::from_single(&model).to_json()?)?;
        }
    } else {
        let sliding = SlidingConfig { window_len: a.window.window, warm_start: a.window.warm_start, mode, fit: config };
        let est = sliding_window_fit(series, &sliding)?;
        for w in &est.windows {
            let mut row: Vec<Cell> = vec![w.start_index.into()];
            row.extend(fit_cells(w.fit.as_ref()));
            t.push(row);
        }
        println!(
            "{} windows, {} failed, {} optimizer iterations",
            est.windows.len(),
            est.failed(),
            est.total_iterations()
        );
        if est.failed() > 0 {
            eprintln!("warning: {} windows failed and were left empty", est.failed());
        }
    }
    write_table(ctx, &a.out.output, &t, a.out.format)
}

struct WindowForecast {
    last_index: usize,
    predictions: Option<Vec<Prediction>>,
}

fn forecast(
    points: &[Point],
    dt: f64,
    start: &ParamVector,
    config: &FitConfig,
    horizon: usize,
) -> (Option<Vec<Prediction>>, Option<ParamVector>) {
    let obs: Vec<Vec<Option<f64>>> = points.iter().map(|p| vec![Some(p.x), Some(p.y)]).collect();
    let attempt = fit_filter(&obs, dt, start, config).and_then(|(fit, out)| {
        let model = model_from_params(dt, &fit.params)?;
        let last = out.last_filtered().expect("window is nonempty");
        Ok((predict_k(&model.system(), last, horizon, 0)?, fit.params))
    });
    match attempt {
        Ok((p, params)) => (Some(p), Some(params)),
        Err(_) => (None, None),
    }
}

fn run_predict(a: &PredictArgs, ctx: &mut RunContext) -> Result<()> {
    if a.window.window < MIN_WINDOW {
        return Err(Error::WindowTooShort { length: a.window.window, minimum: MIN_WINDOW });
    }
    if a.horizon == 0 {
        return Err(Error::InvalidArgument("--horizon must be at least 1".into()));
    }
    let all = load_series(&a.input, ctx)?;
    let series = find_entity(&all, a.window.entity)?;
    let windows = sliding_windows(series, a.window.window);
    if windows.is_empty() {
        return Err(Error::WindowTooShort { length: 0, minimum: a.window.window });
    }
    let mode: CovarianceMode = a.window.mode.into();
    let config = fit_config(&a.window);
    let dt = a.input.dt;
    let cold = cold_start(mode);
    let forecasts: Vec<WindowForecast> = if a.window.warm_start {
        let mut start = cold;
        let mut expected = None;
        windows
            .iter()
            .map(|w| {
                if expected != Some(w.start_index) {
                    start = cold;
                }
                let (predictions, params) = forecast(&w.points, dt, &start, &config, a.horizon);
                start = params.unwrap_or(cold);
                expected = Some(w.start_index + 1);
                WindowForecast { last_index: w.start_index + w.len() - 1, predictions }
            })
            .collect()
    } else {
        windows
            .par_iter()
            .map(|w| WindowForecast {
                last_index: w.start_index + w.len() - 1,
                predictions: forecast(&w.points, dt, &cold, &config, a.horizon).0,
            })
            .collect()
    };

    let mut t = Table::new(&["t", "horizon", "x", "y", "x_lo", "x_hi", "y_lo", "y_hi"]);
    let mut failed = 0;
    for f in &forecasts {
        let Some(preds) = &f.predictions else {
            failed += 1;
            continue;
        };
        for p in preds {
            let r = p.rectangle;
            t.push(vec![
                (f.last_index + p.horizon).into(),
                p.horizon.into(),
                p.mean[0].into(),
                p.mean[1].into(),
                r.x_lo.into(),
                r.x_hi.into(),
                r.y_lo.into(),
                r.y_hi.into(),
            ]);
        }
    }
    println!("{} windows, {failed} failed", forecasts.len());
    write_table(ctx, &a.out.output, &t, a.out.format)?;

    if let Some(path) = &a.plot {
        let points = series.samples.iter().flatten().map(|p| (p.x, p.y));
        let title = format!("{}-step predictions with 95% rectangles", a.horizon);
        let mut fig = Figure::fitted(FIGURE_WIDTH, 0.65 * FIGURE_WIDTH, points, &title);
        fig.axes("x (cm)", "y (cm)");
        for seg in segments(&series.samples) {
            fig.polyline(&seg, RED, 1.2);
        }
        for f in forecasts.iter().step_by(a.plot_stride.max(1)) {
            if let Some(p) = f.predictions.as_ref().and_then(|p| p.last()) {
                let r = p.rectangle;
                fig.rect(r.x_lo, r.x_hi, r.y_lo, r.y_hi, BLUE);
                fig.circle(p.mean[0], p.mean[1], 1.8, BLUE);
            }
        }
        fig.legend("observed", RED);
        fig.legend("prediction", BLUE);
        ctx.write(path, &fig.render())?;
    }
    Ok(())
}

fn run_kinematics(a: &KinematicsArgs, ctx: &mut RunContext) -> Result<()> {
    let all = load_series(&a.input, ctx)?;
    let series = find_entity(&all, a.entity)?;
    let obs = observations(series);
    let dt = a.input.dt;
    let model = match (a.q, a.sigma) {
        (Some(q), Some(sigma)) => diag_model(dt, q, sigma)?,
        _ => {
            let fit = fit_mle(&obs, dt, &cold_start(CovarianceMode::LogCholesky), &FitConfig::default())?;
            println!("fitted Q {:?}, sigma {:?}", fit.accel_cov().as_slice(), fit.sigma());
            model_from_params(dt, &fit.params)?
        }
    };
    let out = filter_pass(&model.system(), &obs, &DiffuseInit::exact(STATE_DIM))?;
    let k = kinematics(&out.filtered, 0)?;
    let mut t = Table::new(&["t", "x", "y", "vx", "vy", "speed"]);
    for (i, (st, (v, s))) in out.filtered.iter().zip(k.velocity.iter().zip(&k.speed)).enumerate() {
        t.push(vec![i.into(), st.mean[0].into(), st.mean[1].into(), v[0].into(), v[1].into(), (*s).into()]);
    }
    write_table(ctx, &a.out.output, &t, a.out.format)?;

    let skip = out.diffuse_steps;
    if let Some(path) = &a.plot {
        let pts: Vec<(f64, f64)> = k.speed.iter().enumerate().skip(skip).map(|(i, s)| (i as f64 * dt, *s)).collect();
        let mut fig = Figure::fitted(FIGURE_WIDTH, 0.45 * FIGURE_WIDTH, pts.iter().copied(), "filtered speed");
        fig.axes("time (s)", "speed (cm/s)");
        fig.polyline(&pts, BLUE, 1.2);
        ctx.write(path, &fig.render())?;
    }
    if let Some(path) = &a.quiver {
        let mut fig = Figure::pitch(&FieldSpec::default(), FIGURE_WIDTH, "filtered velocity, arrows span 1 s");
        for (st, v) in out.filtered.iter().zip(&k.velocity).skip(skip).step_by(5) {
            let (x, y) = (st.mean[0], st.mean[1]);
            fig.arrow((x, y), (x + v[0], y + v[1]), GREEN);
        }
        ctx.write(path, &fig.render())?;
    }
    Ok(())
}

/// Non-overlapping gap-free runs of `length` samples from every series.
fn cut_segments(series: &[TrackingSeries], length: usize) -> Vec<Vec<Point>> {
    let mut out = Vec::new();
    for s in series {
        for (start, len) in s.stretches() {
            for c in 0..len / length {
                let from = start + c * length;
                out.push(s.samples[from..from + length].iter().map(|p| p.unwrap()).collect());
            }
        }
    }
    out
}

fn to_unit(points: &[Point], dt: f64, field: &FieldSpec) -> Result<Vec<f64>> {
    let series = normalize_unit(&TrackingSeries::from_points(0, dt, points)?, field)?;
    Ok(series.samples.iter().flat_map(|p| p.map(|p| [p.x, p.y]).unwrap()).collect())
}

fn from_unit(values: &[f64], id: u32, dt: f64, field: &FieldSpec) -> Result<TrackingSeries> {
    let unit = TrackingSeries::from_points(id, dt, &unflatten_points(values))?;
    Ok(denormalize(&unit, field))
}

fn run_vae_train(a: &VaeTrainArgs, ctx: &mut RunContext) -> Result<()> {
    ctx.seed = Some(a.seed);
    if a.length == 0 {
        return Err(Error::InvalidArgument("--length must be at least 1".into()));
    }
    let field = FieldSpec::default();
    let segments: Vec<Vec<Point>> = match (&a.input, a.scripted) {
        (Some(path), _) => {
            let series = load_series(&InputArgs { input: path.clone(), dt: a.dt }, ctx)?;
            cut_segments(&series, a.length)
        }
        (None, Some(count)) => scripted_dataset(count, a.length as f64 * a.dt, a.dt, a.seed, a.jitter)?
            .iter()
            .map(|s| s.samples.iter().map(|p| p.unwrap()).collect())
            .collect(),
        (None, None) => unreachable!("clap requires one data source"),
    };
    if segments.is_empty() {
        return Err(Error::InvalidArgument(format!("no gap-free segment of {} samples in the data", a.length)));
    }
    let data: Vec<Vec<f64>> = segments.iter().map(|s| to_unit(s, a.dt, &field)).collect::<Result<_>>()?;
    let config = VaeConfig { k: 2 * a.length, d: a.latent_dim, h: a.hidden, sigma_x: a.sigma_x, seed: a.seed };
    let train = TrainConfig { epochs: a.epochs, batch_size: a.batch_size, learning_rate: a.learning_rate, ..TrainConfig::default() };
    let (params, history) = vae::train(&data, config, &train)?;
    ctx.write(&a.output, &params.to_json()?)?;
    if let Some(path) = &a.history {
        let mut t = Table::new(&["epoch", "loss", "reconstruction", "kl"]);
        for i in 0..history.loss.len() {
            t.push(vec![(i + 1).into(), history.loss[i].into(), history.reconstruction[i].into(), history.kl[i].into()]);
        }
        write_table(ctx, path, &t, a.format)?;
    }
    println!(
        "{} trajectories, final mean loss {}, mean absolute deviation {}",
        data.len(),
        history.loss.last().copied().unwrap_or(f64::NAN),
        vae::reconstruction_error(&params, &data)?
    );
    Ok(())
}

fn load_params(path: &std::path::Path, ctx: &mut RunContext) -> Result<VaeParams> {
    VaeParams::from_json(&ctx.read(path)?)
}

fn tracks_figure(title: &str, groups: &[(&[TrackingSeries], &str)]) -> Figure {
    let mut fig = Figure::pitch(&FieldSpec::default(), FIGURE_WIDTH, title);
    for (series, color) in groups {
        for s in series.iter() {
            for seg in segments(&s.samples) {
                fig.polyline(&seg, color, 1.2);
            }
        }
    }
    fig
}

fn run_vae_reconstruct(a: &VaeReconstructArgs, ctx: &mut RunContext) -> Result<()> {
    let params = load_params(&a.params, ctx)?;
    let field = FieldSpec::default();
    let length = params.config.k / 2;
    let series = load_series(&a.input, ctx)?;
    let segs = cut_segments(&series, length);
    if segs.is_empty() {
        return Err(Error::InvalidArgument(format!("no gap-free segment of {length} samples in the input")));
    }
    let mut originals = Vec::new();
    let mut rebuilt = Vec::new();
    let mut deviation = 0.0;
    for (i, seg) in segs.iter().enumerate() {
        let x = to_unit(seg, a.input.dt, &field)?;
        let r = vae::reconstruct(&params, &x)?;
        deviation += x.iter().zip(&r).map(|(u, v)| (u - v).abs()).sum::<f64>() / x.len() as f64;
        originals.push(TrackingSeries::from_points(i as u32 + 1, a.input.dt, seg)?);
        rebuilt.push(from_unit(&r, i as u32 + 1, a.input.dt, &field)?);
    }
    ctx.write(&a.output, &serialize_tracking_csv(&rebuilt))?;
    println!("{} segments, mean absolute deviation {}", segs.len(), deviation / segs.len() as f64);
    if let Some(path) = &a.plot {
        let mut fig = tracks_figure("original and reconstructed", &[(&originals, RED), (&rebuilt, BLUE)]);
        fig.legend("original", RED);
        fig.legend("reconstruction", BLUE);
        ctx.write(path, &fig.render())?;
    }
    Ok(())
}

fn run_vae_generate(a: &VaeGenerateArgs, ctx: &mut RunContext) -> Result<()> {
    ctx.seed = Some(a.seed);
    let params = load_params(&a.params, ctx)?;
    let field = FieldSpec::default();
    let mut rng = SeededRng::new(a.seed);
    let generated: Vec<TrackingSeries> = (0..a.count)
        .map(|i| {
            let z = rng.normal_vec(params.config.d);
            from_unit(&vae::generate(&params, &z)?, i as u32 + 1, a.dt, &field)
        })
        .collect::<Result<_>>()?;
    ctx.write(&a.output, &serialize_tracking_csv(&generated))?;
    if let Some(path) = &a.plot {
        let mut fig = Figure::pitch(&field, FIGURE_WIDTH, "generated trajectories");
        for (i, s) in generated.iter().enumerate() {
            let pts: Vec<(f64, f64)> = s.samples.iter().flatten().map(|p| (p.x, p.y)).collect();
            fig.polyline(&pts, PALETTE[i % PALETTE.len()], 1.2);
        }
        ctx.write(path, &fig.render())?;
    }
    Ok(())
}

fn run_plot(a: &PlotArgs, ctx: &mut RunContext) -> Result<()> {
    let all = load_series(&a.input, ctx)?;
    let selected: Vec<&TrackingSeries> = if a.entity.is_empty() {
        all.iter().collect()
    } else {
        a.entity.iter().map(|id| find_entity(&all, *id)).collect::<Result<_>>()?
    };
    let mut fig = Figure::pitch(&FieldSpec::default(), FIGURE_WIDTH, &a.title);
    for (i, s) in selected.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for seg in segments(&s.samples) {
            fig.polyline(&seg, color, 1.2);
        }
        if selected.len() <= 8 {
            fig.legend(&format!("entity {}", s.entity_id), color);
        }
    }
    ctx.write(&a.output, &fig.render())
}
