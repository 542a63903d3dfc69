use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use isf_cli::commands::{self, parse_sources, parse_topic_weight, CrawlArgs};
use isf_cli::server;
use isf_core::pipeline::{Pipeline, PipelineConfig, SearchRequest, CONFIG_ENV};

/// Integrated search with categorization, clustering and personalization.
#[derive(Debug, Parser)]
#[command(name = "isf", version)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[arg(long)]
    q: String,
    /// Number of results.
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated sources (crawl, structured-records, remote, desktop).
    #[arg(long)]
    sources: Option<String>,
    #[arg(long)]
    user: Option<String>,
    /// Comma-separated category paths to keep.
    #[arg(long)]
    cats: Option<String>,
    /// Profile topic for query expansion.
    #[arg(long)]
    topic: Option<String>,
    #[arg(long)]
    token: Option<String>,
}

impl QueryArgs {
    fn request(&self) -> Result<SearchRequest> {
        Ok(SearchRequest {
            query: self.q.clone(),
            user: self.user.clone(),
            categories: self
                .cats
                .as_deref()
                .map(|c| c.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect())
                .unwrap_or_default(),
            sources: self.sources.as_deref().map(parse_sources).transpose()?,
            topic: self.topic.clone(),
            results: self.k,
            token: self.token.clone(),
        })
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Crawl from a seed list into the page stores.
    Crawl {
        /// One URL per line, `#` comments.
        #[arg(long)]
        seeds: PathBuf,
        #[arg(long, default_value = "db.jsonl")]
        db: PathBuf,
        #[arg(long, default_value = "rdb.jsonl")]
        rdb: PathBuf,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        damping: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        delay_ms: Option<u64>,
        #[arg(long)]
        no_robots: bool,
        /// Keep only pages the taxonomy classifier finds relevant.
        #[arg(long)]
        filter: bool,
        #[arg(long)]
        relevance_threshold: Option<f64>,
    },
    /// Build the crawl index from a page store.
    Index {
        #[arg(long)]
        input: PathBuf,
        /// Overrides the configured index path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a search and print the results.
    Search {
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long)]
        json: bool,
    },
    /// Print each result's categories.
    Categorize {
        #[command(flatten)]
        query: QueryArgs,
        /// Neighbors consulted by the vote.
        #[arg(long)]
        k_neighbors: Option<usize>,
    },
    /// Print the clusters of a result list.
    Cluster {
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Manage user profiles.
    Profile {
        #[command(subcommand)]
        action: ProfileAction,
    },
    /// Score a run against relevance judgments.
    Evaluate {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        qrels: PathBuf,
        #[arg(long, default_value = "eval")]
        out: PathBuf,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        bind: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
enum ProfileAction {
    /// Create or replace a profile; topics as PATH=WEIGHT.
    Init {
        #[arg(long)]
        user: String,
        #[arg(long = "topic")]
        topics: Vec<String>,
    },
    Show {
        #[arg(long)]
        user: String,
    },
    /// Record a visit to a result with these categories.
    Visit {
        #[arg(long)]
        user: String,
        #[arg(long)]
        category: String,
        #[arg(long)]
        secondary: Option<String>,
    },
}

#[tokio::main]
async fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let mut cfg = PipelineConfig::discover(cli.config.as_deref()).context("loading configuration")?;

    let out = match cli.command {
        Command::Crawl {
            seeds,
            db,
            rdb,
            budget,
            width,
            damping,
            epsilon,
            delay_ms,
            no_robots,
            filter,
            relevance_threshold,
        } => {
            let c = &mut cfg.crawl;
            c.budget = budget.unwrap_or(c.budget);
            c.width = width.unwrap_or(c.width);
            c.damping = damping.unwrap_or(c.damping);
            c.epsilon = epsilon.unwrap_or(c.epsilon);
            c.per_host_delay_ms = delay_ms.unwrap_or(c.per_host_delay_ms);
            c.relevance_threshold = relevance_threshold.unwrap_or(c.relevance_threshold);
            if no_robots {
                c.respect_robots = false;
            }
            commands::crawl(&cfg, &CrawlArgs { seeds, db, rdb, filter }).await?
        }
        Command::Index { input, output } => {
            if let Some(o) = output {
                cfg.index = o;
            }
            commands::index(&cfg, &input)?
        }
        Command::Search { query, json } => {
            let req = query.request()?;
            commands::search(&Pipeline::from_config(cfg)?, &req, json).await?
        }
        Command::Categorize { query, k_neighbors } => {
            if let Some(k) = k_neighbors {
                cfg.voting.k = k;
            }
            let req = query.request()?;
            commands::categorize(&Pipeline::from_config(cfg)?, &req).await?
        }
        Command::Cluster { query } => {
            let req = query.request()?;
            commands::cluster(&Pipeline::from_config(cfg)?, &req).await?
        }
        Command::Profile { action } => {
            let p = Pipeline::from_config(cfg)?;
            match action {
                ProfileAction::Init { user, topics } => {
                    let topics = topics.iter().map(|t| parse_topic_weight(t)).collect::<Result<Vec<_>>>()?;
                    commands::profile_init(&p, &user, &topics)?
                }
                ProfileAction::Show { user } => commands::profile_show(&p, &user)?,
                ProfileAction::Visit {
                    user,
                    category,
                    secondary,
                } => commands::profile_visit(&p, &user, &category, secondary.as_deref())?,
            }
        }
        Command::Evaluate { run, qrels, out } => commands::evaluate_files(&run, &qrels, &out)?,
        Command::Serve { bind } => {
            let bind = bind.unwrap_or_else(|| cfg.bind.clone());
            server::serve(Pipeline::from_config(cfg)?, &bind).await?;
            String::new()
        }
    };
    print!("{out}");
    Ok(())
}
