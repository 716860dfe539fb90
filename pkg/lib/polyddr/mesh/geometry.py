import numpy as np

from .. import errors as E


def signed_area(polygon: np.ndarray) -> float:
    x, y = polygon[:, 0], polygon[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def centroid(polygon: np.ndarray) -> np.ndarray:
    x, y = polygon[:, 0], polygon[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * cross.sum()

    if area == 0.0:
        raise E.DegenerateCellError("zero-area polygon has no centroid")

    return np.array(
        [((x + xn) * cross).sum() / (6 * area), ((y + yn) * cross).sum() / (6 * area)]
    )


def diameter(polygon: np.ndarray) -> float:
    diff = polygon[:, None, :] - polygon[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=-1)).max())


def contains(polygon: np.ndarray, points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(points)
    px, py = points[:, 0][:, None], points[:, 1][:, None]
    ax, ay = polygon[:, 0][None, :], polygon[:, 1][None, :]
    bx, by = np.roll(polygon[:, 0], -1)[None, :], np.roll(polygon[:, 1], -1)[None, :]

    straddles = (ay > py) != (by > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        crossing_x = ax + (py - ay) * (bx - ax) / (by - ay)
    crossings = straddles & (px < crossing_x)

    return (crossings.sum(axis=1) % 2) == 1


def boundary_distance(polygon: np.ndarray, points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(points)
    a = polygon[None, :, :]
    b = np.roll(polygon, -1, axis=0)[None, :, :]
    p = points[:, None, :]

    ab = b - a
    t = ((p - a) * ab).sum(axis=-1) / (ab ** 2).sum(axis=-1)
    t = np.clip(t, 0.0, 1.0)
    closest = a + t[..., None] * ab

    return np.sqrt(((p - closest) ** 2).sum(axis=-1)).min(axis=1)


def sees_every_edge(polygon: np.ndarray, points: np.ndarray) -> np.ndarray:
    # every fan triangle (p, a, b) must be positively oriented
    points = np.atleast_2d(points)
    a = polygon[None, :, :] - points[:, None, :]
    b = np.roll(polygon, -1, axis=0)[None, :, :] - points[:, None, :]
    cross = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]

    return (cross > 0).all(axis=1)


def pole_of_inaccessibility(
    polygon: np.ndarray, target: float, levels: int = 12, resolution: int = 8
) -> np.ndarray:
    lower, upper = polygon.min(axis=0), polygon.max(axis=0)
    best, best_score = None, -np.inf

    for _ in range(levels):
        ticks = [
            lower[i] + (np.arange(resolution) + 0.5) * (upper[i] - lower[i]) / resolution
            for i in range(2)
        ]
        grid = np.stack(np.meshgrid(*ticks, indexing="ij"), axis=-1).reshape(-1, 2)
        grid = grid[contains(polygon, grid)]

        if len(grid):
            distance = boundary_distance(polygon, grid)
            # points from which the whole boundary is visible come first
            score = distance - np.where(sees_every_edge(polygon, grid), 0.0, 1e6)
            index = int(np.argmax(score))

            if score[index] > best_score:
                best, best_score = grid[index], float(score[index])

            if best_score >= target:
                break

        if best is None:
            resolution *= 2
        else:
            half = (upper - lower) / 4
            lower, upper = best - half, best + half

    if best is None:
        raise E.DegenerateCellError("no interior point found")

    return best
