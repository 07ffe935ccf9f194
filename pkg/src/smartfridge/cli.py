"""Single entry point: broker, backend, device simulation, experiments, export.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import logging
import sys
from typing import Optional

logger = logging.getLogger("smartfridge")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"error: {message}", file=sys.stderr)
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="smartfridge", description=__doc__)
    parser.add_argument("--seed", type=int, default=7, help="global seed for all stochastic parts")
    parser.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("broker", help="run the pub-sub broker")
    p.add_argument("--host", default="0.0.0.0")
    p.add_argument("--port", type=int, default=1884)
    p.add_argument("--queue-capacity", type=int, default=1024)
    p.add_argument("--keepalive", type=float, default=60.0)

    p = sub.add_parser("backend", help="run the storage/API backend")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--data-dir", required=True)
    p.add_argument("--recipes", default="recipes.json")
    p.add_argument("--reports-dir", default=None, help="experiment run dir served at /api/calibration/report")
    p.add_argument("--broker-host", default="127.0.0.1")
    p.add_argument("--broker-port", type=int, default=1884)
    p.add_argument("--no-broker", action="store_true", help="serve HTTP only, skip ingestion")
    p.add_argument("--token-ttl", type=float, default=24 * 3600)
    p.add_argument("--static-dir", default=None, help="directory with the built dashboard")

    p = sub.add_parser("simulate", help="run simulated devices (optionally everything in one process)")
    p.add_argument("--devices", type=int, default=2)
    p.add_argument("--minutes", type=int, default=None, help="simulated minutes per device (default: run forever)")
    p.add_argument("--accel", type=float, default=1.0,
                   help="wall-clock acceleration; 60 = one simulated minute per real second")
    p.add_argument("--model", default=None, help="model JSON from a finished experiment run")
    p.add_argument("--broker-host", default="127.0.0.1")
    p.add_argument("--broker-port", type=int, default=1884)
    p.add_argument("--all-in-one", action="store_true",
                   help="host broker + backend + devices in this process")
    p.add_argument("--http-port", type=int, default=8080, help="backend port in all-in-one mode")
    p.add_argument("--data-dir", default=None, help="backend data dir in all-in-one mode")
    p.add_argument("--recipes", default="recipes.json")
    p.add_argument("--reports-dir", default=None)
    p.add_argument("--static-dir", default=None)

    p = sub.add_parser("experiment", help="train and compare the three losses, write reports")
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--n-bins", type=int, default=15)

    p = sub.add_parser("export", help="export reliability reports from a finished run")
    p.add_argument("--run", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None)

    return parser


def _cmd_broker(args) -> int:
    from .broker import BrokerServer

    server = BrokerServer(
        host=args.host,
        port=args.port,
        queue_capacity=args.queue_capacity,
        keepalive=args.keepalive,
    )

    async def main() -> None:
        await server.start()
        print(f"BROKER_READY {args.host}:{server.port}", flush=True)
        await server.serve_forever()

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def _cmd_backend(args) -> int:
    from .backend import BackendConfig, BackendService

    config = BackendConfig(
        data_dir=args.data_dir,
        recipes_path=args.recipes,
        reports_dir=args.reports_dir,
        broker_host=None if args.no_broker else args.broker_host,
        broker_port=None if args.no_broker else args.broker_port,
        listen_host=args.host,
        listen_port=args.port,
        token_ttl_seconds=args.token_ttl,
        static_dir=args.static_dir,
    )
    service = BackendService(config)
    try:
        asyncio.run(service.run())
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def _make_devices(args, seed: int):
    from .device import DeviceConfig, DeviceSimulator, device_seed
    from .experiment import load_or_train_device_model

    clf, spec = load_or_train_device_model(args.model, seed)
    sims = []
    for i in range(args.devices):
        config = DeviceConfig(device_id=f"dev-{i}", seed=device_seed(seed, i))
        sims.append(DeviceSimulator(config, clf, spec))
    return sims


def _cmd_simulate(args, seed: int) -> int:
    if args.all_in_one:
        return _cmd_all_in_one(args, seed)

    from .device import DeviceRuntime

    sims = _make_devices(args, seed)

    async def main() -> None:
        runtimes = [
            DeviceRuntime(sim, args.broker_host, args.broker_port,
                          minutes=args.minutes, accel=args.accel)
            for sim in sims
        ]
        await asyncio.gather(*(r.run() for r in runtimes))

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def _cmd_all_in_one(args, seed: int) -> int:
    import tempfile

    from .backend import BackendConfig, BackendService
    from .broker import BrokerServer
    from .device import DeviceRuntime

    data_dir = args.data_dir or tempfile.mkdtemp(prefix="smartfridge-")
    sims = _make_devices(args, seed)

    async def main() -> None:
        broker = BrokerServer(host="127.0.0.1", port=args.broker_port)
        await broker.start()
        service = BackendService(
            BackendConfig(
                data_dir=data_dir,
                recipes_path=args.recipes,
                reports_dir=args.reports_dir,
                broker_host="127.0.0.1",
                broker_port=broker.port,
                listen_host="127.0.0.1",
                listen_port=args.http_port,
                static_dir=args.static_dir,
            )
        )
        sock = service.bind_socket()
        http_port = sock.getsockname()[1]
        http_task = asyncio.create_task(service.serve_http(sock))
        # subscriptions must be live before the first device publishes
        ingest_client = await service.connect_ingest()
        ingest_task = asyncio.create_task(service.pump_ingest(ingest_client))

        runtimes = [
            DeviceRuntime(sim, "127.0.0.1", broker.port, minutes=args.minutes, accel=args.accel)
            for sim in sims
        ]
        device_tasks = [asyncio.create_task(r.run()) for r in runtimes]
        print(
            f"ALL_IN_ONE_READY http=127.0.0.1:{http_port} broker=127.0.0.1:{broker.port} "
            f"data={data_dir}",
            flush=True,
        )
        if device_tasks:
            done = asyncio.create_task(asyncio.wait(device_tasks))
            await asyncio.wait([done, http_task], return_when=asyncio.FIRST_COMPLETED)
            if done.done():
                print("DEVICES_DONE", flush=True)
        # keep serving queries until uvicorn receives SIGINT/SIGTERM
        await http_task
        for task in (ingest_task, *device_tasks):
            task.cancel()
        service.close()
        await broker.stop()

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def _cmd_experiment(args, seed: int) -> int:
    from .experiment import run_experiment

    summary = run_experiment(
        args.out, seed=seed, epochs=args.epochs, lr=args.lr, n_bins=args.n_bins
    )
    for kind, metrics in summary["models"].items():
        print(
            f"{kind:9s} accuracy={metrics['accuracy']:.4f} "
            f"mean_confidence={metrics['meanConfidence']:.4f} ece={metrics['ece']:.4f}"
        )
    scaling = summary["temperatureScaling"]
    print(
        f"temperature T={scaling['temperature']:.4f} focal test ECE "
        f"{scaling['testEceBefore']:.4f} -> {scaling['testEceAfter']:.4f}"
    )
    print("verdict " + json.dumps(summary["verdict"], sort_keys=True))
    return EXIT_OK


def _cmd_export(args) -> int:
    from .experiment import export_run

    for path in export_run(args.run, fmt=args.format, out_dir=args.out):
        print(path)
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return EXIT_USAGE
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "broker":
            return _cmd_broker(args)
        if args.command == "backend":
            return _cmd_backend(args)
        if args.command == "simulate":
            return _cmd_simulate(args, args.seed)
        if args.command == "experiment":
            return _cmd_experiment(args, args.seed)
        if args.command == "export":
            return _cmd_export(args)
        raise AssertionError(f"unhandled command {args.command}")
    except Exception:
        logger.exception("command %s failed", args.command)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
