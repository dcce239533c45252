import type { ComponentJson, HistogramJson } from './types'

// Pure geometry/scaling helpers live outside the canvas class so they can be
// unit-tested without a DOM.

export function binCenters(edges: number[]): number[] {
    const centers: number[] = []
    for (let i = 0; i + 1 < edges.length; i++) {
        centers.push((edges[i] + edges[i + 1]) / 2)
    }
    return centers
}

/** Map a pixel x inside the plot area to the center of the bin it covers. */
export function pixelToBinCenter(
    xPixel: number,
    plotWidth: number,
    histogram: HistogramJson,
): number | null {
    const bins = histogram.counts.length
    if (bins === 0 || plotWidth <= 0 || xPixel < 0 || xPixel >= plotWidth) return null
    const bin = Math.min(bins - 1, Math.floor((xPixel / plotWidth) * bins))
    return binCenters(histogram.edges)[bin]
}

export function laplaceDensity(x: number, median: number, scale: number): number {
    return Math.exp(-Math.abs(x - median) / scale) / (2 * scale)
}

/**
 * Height of a component's overlay curve at x, in count units: the density
 * scaled by beta * N * binwidth so the curve and the bars share one y-axis.
 */
export function overlayHeight(
    x: number,
    component: ComponentJson,
    nSamples: number,
    binWidth: number,
): number {
    if (component.deleted || component.lambda <= 0) return 0
    return laplaceDensity(x, component.median, component.lambda) * component.beta * nSamples * binWidth
}

const PALETTE = ['#2563eb', '#dc2626', '#059669', '#d97706', '#7c3aed', '#0891b2']

export class HistogramView {
    readonly root: HTMLDivElement
    private canvas: HTMLCanvasElement
    private ctx: CanvasRenderingContext2D
    private histogram: HistogramJson = { edges: [], counts: [] }
    private components: ComponentJson[] = []
    private nSamples = 0
    private enabled = false

    constructor(public onPick: (x: number) => void, width = 720, height = 260) {
        this.root = document.createElement('div')
        this.root.className = 'histogram'
        this.canvas = document.createElement('canvas')
        this.canvas.width = width
        this.canvas.height = height
        this.root.appendChild(this.canvas)
        const ctx = this.canvas.getContext('2d')
        if (!ctx) throw new Error('canvas 2d context unavailable')
        this.ctx = ctx
        this.canvas.addEventListener('click', (ev) => {
            if (!this.enabled) return
            const rect = this.canvas.getBoundingClientRect()
            const x = pixelToBinCenter(ev.clientX - rect.left, this.canvas.width, this.histogram)
            if (x !== null) this.onPick(x)
        })
    }

    update(histogram: HistogramJson, components: ComponentJson[], nSamples: number, enabled: boolean) {
        this.histogram = histogram
        this.components = components
        this.nSamples = nSamples
        this.enabled = enabled
        this.canvas.style.cursor = enabled ? 'crosshair' : 'default'
        this.draw()
    }

    private draw() {
        const { ctx, canvas } = this
        const { edges, counts } = this.histogram
        ctx.clearRect(0, 0, canvas.width, canvas.height)
        if (counts.length === 0) {
            ctx.fillStyle = '#6b7280'
            ctx.fillText('no entropy samples', 12, 20)
            return
        }
        const w = canvas.width
        const h = canvas.height
        const binWidth = edges[1] - edges[0]
        const overlayPeaks = this.components
            .filter((c) => !c.deleted && c.lambda > 0)
            .map((c) => overlayHeight(c.median, c, this.nSamples, binWidth))
        const yMax = Math.max(...counts, ...overlayPeaks, 1)
        const barW = w / counts.length

        ctx.fillStyle = '#93c5fd'
        counts.forEach((count, i) => {
            const bh = (count / yMax) * (h - 10)
            ctx.fillRect(i * barW, h - bh, Math.max(barW - 1, 1), bh)
        })

        const lo = edges[0]
        const hi = edges[edges.length - 1]
        this.components.forEach((component, k) => {
            if (component.deleted || component.lambda <= 0) return
            ctx.strokeStyle = PALETTE[k % PALETTE.length]
            ctx.lineWidth = 1.5
            ctx.beginPath()
            for (let px = 0; px < w; px++) {
                const x = lo + ((hi - lo) * px) / (w - 1)
                const y = overlayHeight(x, component, this.nSamples, binWidth)
                const py = h - (y / yMax) * (h - 10)
                if (px === 0) ctx.moveTo(px, py)
                else ctx.lineTo(px, py)
            }
            ctx.stroke()
        })
    }
}
