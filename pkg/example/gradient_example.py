# ruff: noqa
# mypy: ignore-errors
"""
Gradient variants on a kinked temperature field.

Builds a lattice around a flat interface where the normal temperature
gradient jumps, then prints the error table of every variant against CSPH.
"""

from sphmelt import GradlabConfig, gradient_study


def build_config(offset: float = 1700.0) -> GradlabConfig:
    return GradlabConfig.model_validate(
        {
            "cloud": {"dimension": 2, "dx": 1.0, "extent": [24.0, 24.0]},
            "field": {
                "offset": offset,
                "tangential_gradient": 1.0,
                "normal_gradient_below": 2.0,
                "conductivity_ratio": 0.5,
            },
        }
    )


def main() -> None:
    print("sphmelt - gradient study example")
    print("=" * 50)
    report = gradient_study(build_config())
    print(report.table())
    print()
    print(f"Groups: {report.groups}")
    band = report.error("asymmetric", "band")
    print(f"Asymmetric tangential error in the band: {band:.2e}")


if __name__ == "__main__":
    main()
